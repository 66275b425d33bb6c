#pragma once

#include "basinctl/equilibria.hpp"
#include "basinctl/model.hpp"
#include "basinctl/types.hpp"

#include <string>
#include <vector>

namespace basinctl {

/// A parameter-space objective gradient with its unit control direction.
/// Eigenvalue objectives carry the steepest-descent direction -grad/|grad|;
/// distance objectives carry the steepest-ascent direction +grad/|grad|.
struct ObjectiveGradient {
  enum class Kind { Eigenvalue, SaddleDistance };

  Kind kind = Kind::Eigenvalue;
  std::string label;
  Vec grad;                  // gradient of the objective w.r.t. pi
  Vec direction;             // unit vector; undefined when stationary
  bool stationary = false;   // ||grad|| <= 1e-12
  bool complex_flagged = false; // eigenvalue derivative had imaginary parts
};

/// dx*/dpi as the n x m matrix -J^{-1} dF/dpi (implicit function theorem).
/// One LU factorization, m solves. Throws SingularJacobianError when the
/// Jacobian's condition estimate exceeds 1e12.
Mat equilibrium_sensitivity(const ParamModel& model, const Equilibrium& eq, const Vec& pi,
                            const DiffBackend& backend = {});

/// Total derivative of one eigenvalue with respect to one parameter:
///   D_j lambda_i = w^T (D_j J) v / (w^T v),
/// following the equilibrium as it moves. Complex for complex eigenpairs.
/// `sens` may pass a precomputed equilibrium_sensitivity matrix.
Complex eigenvalue_total_derivative(const ParamModel& model, const Equilibrium& eq, const Vec& pi,
                                    int eigen_index, int param_index,
                                    const DiffBackend& backend = {},
                                    const Mat* sens = nullptr);

/// Assembles grad(lambda_i) over all parameters and the unit descent
/// direction d_lambda = -grad/|grad| (real parts; complex flagged).
ObjectiveGradient eigenvalue_gradient(const ParamModel& model, const Equilibrium& eq, const Vec& pi,
                                      int eigen_index, const DiffBackend& backend = {});

/// Euclidean distance between a saddle and a stable point.
double saddle_distance(const Equilibrium& saddle, const Equilibrium& x0);

/// Gradient of the squared saddle-attractor distance,
///   dg/dpi_j = 2 (s - x0)^T (ds/dpi_j - dx0/dpi_j),
/// with the unit ascent direction d_g = +grad/|grad|. The squared-distance
/// convention rescales the gradient by 2|s - x0| > 0, so the unit direction
/// is the same as for the plain distance.
ObjectiveGradient saddle_distance_gradient(const ParamModel& model, const Equilibrium& saddle,
                                           const Equilibrium& x0, const Vec& pi,
                                           const DiffBackend& backend = {});

/// Arithmetic mean of the per-saddle squared-distance gradients with its
/// unit ascent direction.
ObjectiveGradient mean_saddle_distance_gradient(const ParamModel& model,
                                                const std::vector<const Equilibrium*>& saddles,
                                                const Equilibrium& x0, const Vec& pi,
                                                const DiffBackend& backend = {});

}  // namespace basinctl
