#pragma once

#include "basinctl/equilibria.hpp"
#include "basinctl/model.hpp"
#include "basinctl/types.hpp"

#include <cstdint>
#include <vector>

namespace basinctl {

struct IntegrateOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double blowup_norm = 1e6;
  double field_tol = 1e-9;      // early-exit threshold on ||F||
  double capture_radius = 1e-4; // early-exit distance to a listed attractor
};

enum class IntegrateStatus { ReachedTMax, Converged, BlowUp };

/// Capture target for early convergence: a stable equilibrium plus the
/// magnitude of its fastest decaying eigenvalue (used to keep adaptive steps
/// inside the explicit method's stability region while homing in).
struct AttractorTarget {
  Vec x;
  double decay_rate = 1.0;
};

struct IntegrateResult {
  Vec x;
  double t = 0.0;
  IntegrateStatus status = IntegrateStatus::ReachedTMax;
  int attractor = -1; // index into the attractor list when Converged
  std::size_t n_steps = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of x' = F(x, pi) from x0 up to
/// t_max. When attractor states are supplied, integration exits early once
/// ||F|| < field_tol and x lies within capture_radius of exactly one of
/// them; within reach of two or more it keeps integrating.
IntegrateResult integrate(const ParamModel& model, const Vec& pi, const Vec& x0, double t_max,
                          const IntegrateOptions& opts = {},
                          const std::vector<AttractorTarget>* attractors = nullptr);

constexpr int kUnresolved = -1;

/// Attractor index (into census.stable()) reached from x0, or kUnresolved.
/// Blow-ups and unconverged trajectories count as unresolved.
int classify_initial_condition(const ParamModel& model, const Vec& pi, const Vec& x0,
                               const EquilibriumCensus& census, const Box& box, double t_max,
                               const IntegrateOptions& opts = {});

struct BasinEstimate {
  std::vector<Vec> attractors;           // stable equilibria, census order
  std::vector<double> fractions;         // per attractor
  std::vector<double> ci99_half_widths;  // 99% binomial confidence half-widths
  double unresolved_fraction = 0.0;
  int n_samples = 0;
  std::uint64_t rng_seed = 0;
  Box box;
};

/// Monte Carlo basin fractions from n_samples i.i.d. uniform points in the
/// box. Per-sample RNG streams are derived from (seed, index), so the
/// estimate is identical for any thread count.
BasinEstimate basin_fractions(const ParamModel& model, const Vec& pi,
                              const EquilibriumCensus& census, const Box& box, int n_samples,
                              std::uint64_t rng_seed, double t_max,
                              const IntegrateOptions& opts = {}, int n_threads = 1);

}  // namespace basinctl
