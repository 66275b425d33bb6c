#include "basinctl/model.hpp"

#include "basinctl/errors.hpp"

#include <cmath>
#include <string>

namespace basinctl {

namespace {

void check_dims(const ParamModel& model, const Vec& x, const Vec& pi) {
  if (x.size() != model.state_dim)
    throw Error(model.name + ": state dimension mismatch (" + std::to_string(x.size()) +
                " vs " + std::to_string(model.state_dim) + ")");
  if (pi.size() != model.param_dim)
    throw Error(model.name + ": parameter dimension mismatch (" + std::to_string(pi.size()) +
                " vs " + std::to_string(model.param_dim) + ")");
  if (!x.allFinite() || !pi.allFinite())
    throw NonFiniteError(model.name + ": non-finite input");
}

void check_finite(const ParamModel& model, const char* what, const Mat& m) {
  if (!m.allFinite()) throw NonFiniteError(model.name + std::string(": non-finite ") + what);
}

double rel_step(double h, double coord) { return h * std::max(1.0, std::abs(coord)); }

bool use_analytic(const ParamModel& model, const DiffBackend& backend) {
  return backend.mode == DiffBackend::Mode::Analytic && model.has_analytic();
}

}  // namespace

Vec eval_field(const ParamModel& model, const Vec& x, const Vec& pi) {
  check_dims(model, x, pi);
  Vec f = model.field_eval(x, pi);
  if (!f.allFinite())
    throw NonFiniteError(model.name + ": field evaluation produced NaN/Inf");
  return f;
}

Mat jacobian_x(const ParamModel& model, const Vec& x, const Vec& pi, const DiffBackend& backend) {
  check_dims(model, x, pi);
  if (use_analytic(model, backend)) {
    Mat J = model.jac_x(x, pi);
    check_finite(model, "state Jacobian", J);
    return J;
  }
  const int n = model.state_dim;
  Mat J(n, n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double h = rel_step(backend.fd_step, x[j]);
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (eval_field(model, xp, pi) - eval_field(model, xm, pi)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  check_finite(model, "state Jacobian", J);
  return J;
}

Mat jacobian_pi(const ParamModel& model, const Vec& x, const Vec& pi, const DiffBackend& backend) {
  check_dims(model, x, pi);
  if (use_analytic(model, backend)) {
    Mat J = model.jac_pi(x, pi);
    check_finite(model, "parameter Jacobian", J);
    return J;
  }
  const int n = model.state_dim;
  const int m = model.param_dim;
  Mat J(n, m);
  Vec pp = pi, pm = pi;
  for (int j = 0; j < m; ++j) {
    const double h = rel_step(backend.fd_step, pi[j]);
    pp[j] = pi[j] + h;
    pm[j] = pi[j] - h;
    J.col(j) = (eval_field(model, x, pp) - eval_field(model, x, pm)) / (2.0 * h);
    pp[j] = pi[j];
    pm[j] = pi[j];
  }
  check_finite(model, "parameter Jacobian", J);
  return J;
}

Mat total_jacobian_derivative(const ParamModel& model, const Vec& x_star, const Vec& pi,
                              int param_index, const Vec& dx_dpi, const DiffBackend& backend) {
  check_dims(model, x_star, pi);
  if (param_index < 0 || param_index >= model.param_dim)
    throw Error(model.name + ": parameter index out of range");

  // Directional central difference of J(x, pi) along (dx_dpi, e_i). The step
  // is relative to the perturbed parameter and shrunk when the equilibrium
  // moves fast, so both arguments stay within their linear range.
  const double scale = std::max(1.0, dx_dpi.lpNorm<Eigen::Infinity>());
  const double h = rel_step(backend.fd_step, pi[param_index]) / scale;

  Vec pi_p = pi, pi_m = pi;
  pi_p[param_index] += h;
  pi_m[param_index] -= h;
  const Mat Jp = jacobian_x(model, x_star + h * dx_dpi, pi_p, backend);
  const Mat Jm = jacobian_x(model, x_star - h * dx_dpi, pi_m, backend);
  Mat D = (Jp - Jm) / (2.0 * h);
  check_finite(model, "total Jacobian derivative", D);
  return D;
}

}  // namespace basinctl
