#pragma once

#include "basinctl/cone.hpp"
#include "basinctl/equilibria.hpp"
#include "basinctl/model.hpp"
#include "basinctl/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace basinctl {

/// Which eigenvalues of the controlled equilibrium to push down.
/// Indices refer to the descending-real-part order at iteration 0; after
/// that, targets are tracked by eigenvector continuity.
struct EigenTargetSpec {
  std::vector<int> indices;
  bool auto_tangent = false; // derive indices from saddle-direction tangency
  double delta = 1.0;        // required decrease of Re(lambda)

  bool empty() const { return indices.empty() && !auto_tangent; }
};

/// Which saddles around the controlled equilibrium participate.
struct SaddleSelection {
  enum class Mode { AllSaddles, NearestK, Anchors };
  Mode mode = Mode::AllSaddles;
  int k = 0;                 // NearestK
  std::vector<Vec> anchors;  // Anchors: nearest saddle to each anchor
};

struct ControlEvent {
  enum class Type {
    Bifurcation,       // continuation lost or classification changed
    ComplexOnset,      // a targeted eigenvalue acquired an imaginary part
    Stall,             // no admissible descent direction (subtype in detail)
    Goal,              // all targets met
    CensusChanged,     // periodic re-scan found different equilibrium counts
    AmbiguousEigenMatch
  };
  Type type;
  std::string detail;
};

std::string to_string(ControlEvent::Type t);

enum class TerminationReason {
  GoalReached,
  MaxIterations,
  Bifurcation,
  Stall,
  ComplexEigenvalues, // only when complex_fatal is set
  AmbiguousMatch
};

std::string to_string(TerminationReason r);

struct ControlConfig {
  double epsilon = 1e-2;
  int n_ite = 1000;
  AffineConeSpec cone;
  bool normalize_gradients = true; // unit-normalize each objective before MGDA
  bool complex_fatal = false;      // terminate on complex eigenvalue onset
  bool stop_on_bifurcation = true;
  int rescan_every = 50;           // full census re-scan cadence; 0 disables

  // Census used to locate the controlled equilibrium and saddles.
  Box census_box;
  int n_seeds = 200;
  std::uint64_t rng_seed = 1;

  DiffBackend backend{};
  EquilibriumOptions eq_opts{};
};

/// One row per iteration: the state *before* the parameter update plus the
/// chosen direction; the terminal row has no direction. Consecutive rows
/// satisfy pi_{t+1} = pi_t + epsilon * direction_t.
struct TraceRecord {
  int iteration = 0;
  Vec pi;
  std::vector<Complex> eigen_values; // per eigen target
  std::vector<double> distances;     // per distance objective
  Vec direction;                     // unit; empty on the terminal row
  std::vector<double> weights;       // MGDA weights of active objectives
  std::vector<double> overlaps;      // eigenpair match overlaps
  std::vector<ControlEvent> events;
};

struct ControlTrace {
  std::vector<TraceRecord> records;   // empty when n_ite = 0 and no goal
  TerminationReason termination = TerminationReason::MaxIterations;
  int iterations = 0;                 // parameter updates actually applied
  Vec final_parameters;
  std::vector<std::string> objective_labels; // eigen targets then distances
  std::vector<int> eigen_indices;     // resolved target indices at iteration 0
  std::vector<Complex> initial_eigen_values;
  std::vector<double> initial_distances;

  // Controlled equilibrium and its census companions at start and end,
  // for downstream basin comparisons.
  Equilibrium x0_initial;
  Equilibrium x0_final;
  std::vector<Equilibrium> tracked_final_stable;

  const Vec& final_pi() const { return final_parameters; }
};

/// Control strategies 1-2: iteratively descend the targeted eigenvalues of
/// the stable equilibrium nearest `anchor` (MGDA across several targets),
/// projecting each step onto the admissible cone.
ControlTrace run_eigenvalue_control(const ParamModel& model, const Vec& pi0, const Vec& anchor,
                                    const EigenTargetSpec& eigen, const ControlConfig& config);

/// Control strategies 3-4: push the selected saddles away from the stable
/// equilibrium nearest `anchor`; each saddle distance is its own objective.
ControlTrace run_saddle_control(const ParamModel& model, const Vec& pi0, const Vec& anchor,
                                const SaddleSelection& saddles, double delta_g,
                                const ControlConfig& config);

/// Combined objective set: targeted eigenvalues plus the mean distance to
/// the selected saddles. Tracks every equilibrium of the initial census and
/// stops when any stable one is lost in a bifurcation.
ControlTrace run_multiobjective_control(const ParamModel& model, const Vec& pi0, const Vec& anchor,
                                        const EigenTargetSpec& eigen,
                                        const SaddleSelection& saddles, double delta_g_mean,
                                        const ControlConfig& config);

/// The stable equilibrium of the census closest to `anchor`. Throws
/// SelectorError when the census has no stable point or the two nearest are
/// equidistant within relative 1e-6.
const Equilibrium& select_stable(const EquilibriumCensus& census, const Vec& anchor);

/// Saddles chosen by a SaddleSelection against a census, sorted by distance
/// to x0.
std::vector<const Equilibrium*> select_saddles(const EquilibriumCensus& census,
                                               const Equilibrium& x0,
                                               const SaddleSelection& sel);

/// Eigen indices of x0 whose eigenvectors are most tangent to the
/// saddle-connection directions (s - x0), deduplicated and sorted.
std::vector<int> select_tangent_eigen_indices(const Equilibrium& x0,
                                              const std::vector<const Equilibrium*>& saddles);

}  // namespace basinctl
