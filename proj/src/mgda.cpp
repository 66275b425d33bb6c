#include "basinctl/mgda.hpp"

#include "basinctl/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace basinctl {

namespace {

struct Candidate {
  std::vector<double> weights;
  double norm2 = std::numeric_limits<double>::infinity();
};

Vec combine(const std::vector<Vec>& g, const std::vector<double>& w) {
  Vec out = Vec::Zero(g.front().size());
  for (std::size_t i = 0; i < g.size(); ++i) out += w[i] * g[i];
  return out;
}

// Min-norm point on the affine hull of a subset, via the KKT system of
//   min w^T G w  s.t.  sum w = 1.
bool face_solution(const Mat& gram, const std::vector<int>& subset, std::vector<double>& w_full) {
  const int s = static_cast<int>(subset.size());
  Mat kkt = Mat::Zero(s + 1, s + 1);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) kkt(a, b) = 2.0 * gram(subset[a], subset[b]);
    kkt(a, s) = 1.0;
    kkt(s, a) = 1.0;
  }
  Vec rhs = Vec::Zero(s + 1);
  rhs[s] = 1.0;
  const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite()) return false;
  double sum = 0.0;
  for (int a = 0; a < s; ++a) {
    if (sol[a] < -1e-10) return false;  // leaves the simplex; another face wins
    sum += std::max(0.0, sol[a]);
  }
  if (std::abs(sum - 1.0) > 1e-8) return false;
  std::fill(w_full.begin(), w_full.end(), 0.0);
  for (int a = 0; a < s; ++a) w_full[subset[a]] = std::max(0.0, sol[a]) / sum;
  return true;
}

Candidate enumerate_faces(const std::vector<Vec>& g, const Mat& gram) {
  const int k = static_cast<int>(g.size());
  Candidate best;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) subset.push_back(i);
    std::vector<double> w(k, 0.0);
    if (subset.size() == 1) {
      w[subset[0]] = 1.0;
    } else if (!face_solution(gram, subset, w)) {
      continue;
    }
    const double n2 = combine(g, w).squaredNorm();
    if (n2 < best.norm2 - 1e-15) best = {w, n2};
  }
  return best;
}

// Euclidean projection onto the unit simplex (sort-based).
void project_simplex(Vec& w) {
  const int k = static_cast<int>(w.size());
  std::vector<double> u(w.data(), w.data() + k);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < k; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (int i = 0; i < k; ++i) w[i] = std::max(0.0, w[i] - theta);
}

Candidate projected_gradient(const std::vector<Vec>& g, const Mat& gram) {
  const int k = static_cast<int>(g.size());

  // Step 1/lambda_max(G); a few power iterations pin the spectral radius.
  double lmax = gram.trace();
  {
    Vec v = Vec::Ones(k).normalized();
    for (int it = 0; it < 50; ++it) {
      Vec gv = gram * v;
      const double n = gv.norm();
      if (n <= 1e-300) break;
      lmax = n;
      v = gv / n;
    }
  }
  const double step = 1.0 / std::max(1e-30, 2.0 * lmax);

  Vec w = Vec::Constant(k, 1.0 / k);
  for (int it = 0; it < 500000; ++it) {
    Vec w_next = w - step * 2.0 * (gram * w);
    project_simplex(w_next);
    const double move = (w_next - w).lpNorm<Eigen::Infinity>();
    w = w_next;
    if (move <= 1e-12) break;
  }

  std::vector<double> best(w.data(), w.data() + k);
  double best_norm2 = combine(g, best).squaredNorm();

  // Active-set polish: solve exactly on the face PGD identified, dropping
  // negative weights until the face solve lands inside the simplex.
  std::vector<int> active;
  for (int i = 0; i < k; ++i)
    if (w[i] > 1e-10) active.push_back(i);
  while (!active.empty()) {
    std::vector<double> w_face(k, 0.0);
    if (face_solution(gram, active, w_face)) {
      const double n2 = combine(g, w_face).squaredNorm();
      if (n2 <= best_norm2) {
        best = w_face;
        best_norm2 = n2;
      }
      break;
    }
    // The equality-constrained minimizer left the simplex: retry on the
    // face without the most negative coordinate.
    Mat kkt = Mat::Zero(active.size() + 1, active.size() + 1);
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = 0; b < active.size(); ++b)
        kkt(a, b) = 2.0 * gram(active[a], active[b]);
      kkt(a, active.size()) = 1.0;
      kkt(active.size(), a) = 1.0;
    }
    Vec rhs = Vec::Zero(active.size() + 1);
    rhs[active.size()] = 1.0;
    const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    int drop = 0;
    double most_negative = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (sol[a] < most_negative) {
        most_negative = sol[a];
        drop = static_cast<int>(a);
      }
    }
    active.erase(active.begin() + drop);
  }
  return {best, best_norm2};
}

}  // namespace

HullSolution min_norm_hull_point(const std::vector<Vec>& gradients) {
  if (gradients.empty()) throw Error("min_norm_hull_point: no gradients");
  const int m = static_cast<int>(gradients.front().size());
  for (const Vec& g : gradients) {
    if (g.size() != m) throw Error("min_norm_hull_point: inconsistent dimensions");
    if (!g.allFinite()) throw NonFiniteError("min_norm_hull_point: non-finite gradient");
  }

  const int k = static_cast<int>(gradients.size());
  Mat gram(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b <= a; ++b) gram(a, b) = gram(b, a) = gradients[a].dot(gradients[b]);

  const Candidate best =
      (k <= 3) ? enumerate_faces(gradients, gram) : projected_gradient(gradients, gram);

  HullSolution sol;
  sol.weights = best.weights;
  sol.direction = combine(gradients, best.weights);
  sol.norm = sol.direction.norm();
  sol.is_pareto_stationary = sol.norm <= HullSolution::kStationaryTol;
  return sol;
}

Vec cone_project(const Vec& direction, const AffineConeSpec& cone, const Vec* sensitivities) {
  const int m = static_cast<int>(direction.size());
  if (direction.norm() <= 0.0) throw Error("cone_project: zero direction");

  Vec out = direction;
  switch (cone.kind) {
    case AffineConeSpec::Kind::Full:
      break;
    case AffineConeSpec::Kind::CoordinateSubset: {
      std::vector<bool> keep(m, false);
      for (int idx : cone.indices) {
        if (idx < 0 || idx >= m) throw Error("cone_project: subset index out of range");
        keep[idx] = true;
      }
      for (int i = 0; i < m; ++i)
        if (!keep[i]) out[i] = 0.0;
      break;
    }
    case AffineConeSpec::Kind::SignConstrained: {
      if (static_cast<int>(cone.signs.size()) != m)
        throw Error("cone_project: sign vector dimension mismatch");
      for (int i = 0; i < m; ++i) {
        const int s = cone.signs[i];
        if (s > 0 && out[i] < 0.0) out[i] = 0.0;
        if (s < 0 && out[i] > 0.0) out[i] = 0.0;
      }
      break;
    }
    case AffineConeSpec::Kind::TopKBySensitivity: {
      if (cone.k < 1) throw EmptyProjectionError("cone_project: top-k cone with k < 1");
      const Vec& score = sensitivities ? *sensitivities : direction;
      if (score.size() != m) throw Error("cone_project: sensitivity dimension mismatch");
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(score[a]) != std::abs(score[b])) return std::abs(score[a]) > std::abs(score[b]);
        return a < b;  // deterministic tie-break
      });
      std::vector<bool> keep(m, false);
      for (int i = 0; i < std::min(cone.k, m); ++i) keep[order[i]] = true;
      for (int i = 0; i < m; ++i)
        if (!keep[i]) out[i] = 0.0;
      break;
    }
  }

  const double norm = out.norm();
  if (norm <= 1e-15)
    throw EmptyProjectionError("cone_project: projection removed every component");
  return out / norm;
}

}  // namespace basinctl
