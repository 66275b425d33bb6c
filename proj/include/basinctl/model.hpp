#pragma once

#include "basinctl/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace basinctl {

/// Parameterized vector field  x' = F(x, pi)  with optional analytic
/// derivative callbacks. Evaluation must be deterministic; derivative
/// callbacks, when present, must agree with central finite differences.
struct ParamModel {
  std::string name;
  int state_dim = 0;
  int param_dim = 0;
  std::vector<std::string> state_names;
  std::vector<std::string> param_names;

  std::function<Vec(const Vec& x, const Vec& pi)> field_eval;
  std::function<Mat(const Vec& x, const Vec& pi)> jac_x;    // n x n, optional
  std::function<Mat(const Vec& x, const Vec& pi)> jac_pi;   // n x m, optional

  bool has_analytic() const { return static_cast<bool>(jac_x) && static_cast<bool>(jac_pi); }
};

/// How derivatives are obtained: hand-coded callbacks when the model has
/// them, central finite differences otherwise (and as cross-check oracle).
struct DiffBackend {
  enum class Mode { Analytic, CentralFiniteDifference };
  Mode mode = Mode::Analytic;       // falls back to FD if callbacks absent
  double fd_step = 1e-6;            // relative step, scaled by max(1,|coord|)

  static DiffBackend analytic() { return {Mode::Analytic, 1e-6}; }
  static DiffBackend finite_difference(double h = 1e-6) {
    return {Mode::CentralFiniteDifference, h};
  }
};

/// F(x, pi); throws NonFiniteError on NaN/Inf output.
Vec eval_field(const ParamModel& model, const Vec& x, const Vec& pi);

/// dF/dx (n x n) at (x, pi).
Mat jacobian_x(const ParamModel& model, const Vec& x, const Vec& pi,
               const DiffBackend& backend = {});

/// dF/dpi (n x m) at (x, pi).
Mat jacobian_pi(const ParamModel& model, const Vec& x, const Vec& pi,
                const DiffBackend& backend = {});

/// Total derivative of the state Jacobian with respect to parameter i along
/// an equilibrium branch:  D_i J = (dJ/dx) (dx*/dpi_i) + dJ/dpi_i.
/// Computed as a directional central difference of J along (dx_dpi, e_i),
/// which avoids assembling the third-order tensor dJ/dx.
Mat total_jacobian_derivative(const ParamModel& model, const Vec& x_star, const Vec& pi,
                              int param_index, const Vec& dx_dpi,
                              const DiffBackend& backend = {});

}  // namespace basinctl
