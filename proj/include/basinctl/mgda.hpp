#pragma once

#include "basinctl/cone.hpp"
#include "basinctl/types.hpp"

#include <vector>

namespace basinctl {

/// Minimum-norm element of the convex hull of the input gradients.
/// omega = sum_i weights_i * g_i with weights on the unit simplex; omega = 0
/// exactly when the inputs are Pareto-stationary.
struct HullSolution {
  std::vector<double> weights;
  Vec direction;                    // omega
  double norm = 0.0;
  bool is_pareto_stationary = false;

  static constexpr double kStationaryTol = 1e-9;
};

/// Solves min_{w in simplex} || sum_i w_i g_i ||. Exact face enumeration for
/// k <= 3; projected gradient descent (tol 1e-12) for larger k. The result
/// satisfies the min-norm optimality condition <omega, g_i> >= |omega|^2 for
/// every input gradient.
HullSolution min_norm_hull_point(const std::vector<Vec>& gradients);

/// The cone element maximizing cosine similarity with `direction`,
/// renormalized to unit length. For top-k cones the k kept coordinates are
/// those of largest |sensitivities_i| (defaults to |direction_i| when no
/// sensitivity vector is given). Throws EmptyProjectionError when every
/// coordinate is zeroed.
Vec cone_project(const Vec& direction, const AffineConeSpec& cone,
                 const Vec* sensitivities = nullptr);

}  // namespace basinctl
