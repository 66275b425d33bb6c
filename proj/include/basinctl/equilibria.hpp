#pragma once

#include "basinctl/model.hpp"
#include "basinctl/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace basinctl {

enum class Classification { Stable, Saddle, Unstable, NonHyperbolic };

std::string to_string(Classification c);

/// Numerical knobs for the root search and classification. Values are the
/// project-wide defaults; tests pin behaviour against them.
struct EquilibriumOptions {
  double newton_tol = 1e-10;          // on ||F||
  int newton_max_iter = 100;
  int continuation_max_iter = 50;
  double hyperbolicity_margin = 1e-8; // |Re(lambda)| below this => NonHyperbolic
  double jump_factor = 1e2;           // continuation jump guard multiplier
};

/// A located fixed point with its eigen-decomposition.
///
/// Right eigenvectors are columns of `right_eigenvectors`; left eigenvectors
/// (rows w^T with w^T J = lambda w^T) are columns of `left_eigenvectors`,
/// paired to `eigenvalues` by proximity. All eigenvectors are unit norm with
/// a canonical phase. Eigenvalues are sorted by descending real part.
struct Equilibrium {
  Vec x;
  Vec params;             // the pi at which the point was located
  double residual_norm = 0.0;
  CVec eigenvalues;
  CMat right_eigenvectors;
  CMat left_eigenvectors;
  Classification classification = Classification::NonHyperbolic;
  int unstable_count = 0; // eigenvalues with Re > margin

  bool is_stable() const { return classification == Classification::Stable; }
  bool is_saddle() const { return classification == Classification::Saddle; }
};

struct EquilibriumCensus {
  std::vector<Equilibrium> equilibria; // sorted lexicographically by state
  int n_stable = 0;
  int n_saddle = 0;
  int n_unstable = 0;
  int n_nonhyperbolic = 0;

  std::vector<const Equilibrium*> stable() const;
  std::vector<const Equilibrium*> saddles() const;
};

/// Classify a Jacobian by counting eigenvalue real-part signs against the
/// hyperbolicity margin. Exactly one positive eigenvalue means a saddle
/// (stable manifold of dimension n-1).
Classification classify(const Mat& J, double margin = 1e-8, int* unstable_count = nullptr);

/// Build the full eigen record (decomposition + classification) for a root.
Equilibrium make_equilibrium(const ParamModel& model, const Vec& x, const Vec& pi,
                             const DiffBackend& backend = {},
                             const EquilibriumOptions& opts = {});

/// Damped-Newton multistart from Halton seeds in `box`; converged roots are
/// deduplicated at 1e-6 * diam(box) and classified. Deterministic for a
/// given (rng_seed, n_seeds).
EquilibriumCensus find_equilibria(const ParamModel& model, const Vec& pi, const Box& box,
                                  int n_seeds, std::uint64_t rng_seed,
                                  const DiffBackend& backend = {},
                                  const EquilibriumOptions& opts = {});

/// Warm-started Newton continuation of eq_prev to the new parameters.
/// Throws ContinuationLostError when Newton fails or the root jumps farther
/// than jump_factor * ||dpi|| * ||dx*/dpi||; throws ClassificationChangedError
/// when the continued root changes stability class.
Equilibrium continue_equilibrium(const ParamModel& model, const Equilibrium& eq_prev,
                                 const Vec& pi_new, const DiffBackend& backend = {},
                                 const EquilibriumOptions& opts = {});

/// Index of the eigenpair of eq_new whose right eigenvector has the largest
/// overlap |<v_i, v_prev>| with v_prev; the overlap is returned through
/// `overlap_out`. Throws AmbiguousMatchError when the top two overlaps are
/// within 0.1 of each other.
int match_eigenpair(const Equilibrium& eq_new, const CVec& v_prev, double* overlap_out = nullptr);

}  // namespace basinctl
