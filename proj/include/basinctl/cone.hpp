#pragma once

#include <vector>

namespace basinctl {

/// Admissible parameter-update directions form an affine cone with vertex at
/// the current parameter vector. Only the kinds used by the control
/// strategies are supported; all are closed under positive scaling.
struct AffineConeSpec {
  enum class Kind {
    Full,             // all of R^m
    CoordinateSubset, // only the listed parameter indices may move
    SignConstrained,  // per-coordinate sign restriction (-1, 0=free, +1)
    TopKBySensitivity // k most sensitive coordinates, re-picked each use
  };

  Kind kind = Kind::Full;
  std::vector<int> indices;     // CoordinateSubset
  std::vector<int> signs;       // SignConstrained, entries in {-1, 0, +1}
  int k = 0;                    // TopKBySensitivity

  static AffineConeSpec full() { return {}; }
  static AffineConeSpec subset(std::vector<int> idx) {
    AffineConeSpec c;
    c.kind = Kind::CoordinateSubset;
    c.indices = std::move(idx);
    return c;
  }
  static AffineConeSpec sign_constrained(std::vector<int> s) {
    AffineConeSpec c;
    c.kind = Kind::SignConstrained;
    c.signs = std::move(s);
    return c;
  }
  static AffineConeSpec top_k(int kk) {
    AffineConeSpec c;
    c.kind = Kind::TopKBySensitivity;
    c.k = kk;
    return c;
  }
};

}  // namespace basinctl
