#pragma once

#include "basinctl/types.hpp"

#include <cstdint>

namespace basinctl {

/// Halton radical-inverse in the given prime base.
double halton(std::uint64_t index, unsigned base);

/// Low-discrepancy point in [0,1)^dim; successive indices fill the cube evenly.
Vec halton_point(std::uint64_t index, int dim);

/// SplitMix64 step; used to derive independent per-sample streams.
std::uint64_t splitmix64(std::uint64_t& state);

/// Counter-based uniform samples: sample `i` of stream `seed` is a fixed
/// function of (seed, i), so parallel and serial draws agree exactly.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t sample_index);

  /// Uniform double in [0,1).
  double next_unit();

  /// Uniform point in the box.
  Vec next_in_box(const Box& box);

 private:
  std::uint64_t state_;
};

}  // namespace basinctl
