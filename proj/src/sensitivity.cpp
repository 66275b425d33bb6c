#include "basinctl/sensitivity.hpp"

#include "basinctl/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace basinctl {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kStationaryNorm = 1e-12;
constexpr double kSimpleGap = 1e-8;
constexpr double kOrthogonalTol = 1e-10;

// Treat a derivative as genuinely complex only above roundoff scale.
bool significant_imag(const Complex& z) {
  return std::abs(z.imag()) > 1e-9 * std::max(1.0, std::abs(z.real()));
}

ObjectiveGradient finish_gradient(ObjectiveGradient g, double orientation) {
  const double norm = g.grad.norm();
  if (norm <= kStationaryNorm) {
    g.stationary = true;
    g.direction = Vec::Zero(g.grad.size());
  } else {
    g.direction = orientation * g.grad / norm;
  }
  return g;
}

}  // namespace

Mat equilibrium_sensitivity(const ParamModel& model, const Equilibrium& eq, const Vec& pi,
                            const DiffBackend& backend) {
  const Mat J = jacobian_x(model, eq.x, pi, backend);
  const Eigen::PartialPivLU<Mat> lu(J);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kConditionLimit)) {
    std::ostringstream os;
    os << "equilibrium Jacobian nearly singular (rcond " << rcond << "); near a bifurcation?";
    throw SingularJacobianError(os.str());
  }
  const Mat Jpi = jacobian_pi(model, eq.x, pi, backend);
  Mat sens = lu.solve(-Jpi);
  if (!sens.allFinite()) throw NonFiniteError("equilibrium sensitivity is non-finite");
  return sens;
}

Complex eigenvalue_total_derivative(const ParamModel& model, const Equilibrium& eq, const Vec& pi,
                                    int eigen_index, int param_index, const DiffBackend& backend,
                                    const Mat* sens) {
  const int n = model.state_dim;
  if (eigen_index < 0 || eigen_index >= n) throw Error("eigen index out of range");

  const Complex lambda = eq.eigenvalues[eigen_index];
  for (int k = 0; k < n; ++k) {
    if (k == eigen_index) continue;
    if (std::abs(eq.eigenvalues[k] - lambda) <= kSimpleGap) {
      std::ostringstream os;
      os << "eigenvalue " << eigen_index << " not simple: |lambda_" << eigen_index << " - lambda_"
         << k << "| <= " << kSimpleGap;
      throw DegenerateEigenvalueError(os.str());
    }
  }

  const CVec v = eq.right_eigenvectors.col(eigen_index);
  const CVec w = eq.left_eigenvectors.col(eigen_index);
  // Bilinear pairing w^T v (no conjugation): w is a left eigenvector of J,
  // so w^T J = lambda w^T holds with the plain transpose.
  const Complex wv = (w.transpose() * v)(0);
  if (std::abs(wv) < kOrthogonalTol * w.norm() * v.norm())
    throw NearOrthogonalPairError("left/right eigenvector pair nearly orthogonal");

  Mat local_sens;
  if (!sens) {
    local_sens = equilibrium_sensitivity(model, eq, pi, backend);
    sens = &local_sens;
  }
  const Mat DJ =
      total_jacobian_derivative(model, eq.x, pi, param_index, sens->col(param_index), backend);
  const Complex num = (w.transpose() * DJ * v)(0);
  return num / wv;
}

ObjectiveGradient eigenvalue_gradient(const ParamModel& model, const Equilibrium& eq,
                                      const Vec& pi, int eigen_index,
                                      const DiffBackend& backend) {
  const int m = model.param_dim;
  const Mat sens = equilibrium_sensitivity(model, eq, pi, backend);

  ObjectiveGradient g;
  g.kind = ObjectiveGradient::Kind::Eigenvalue;
  g.label = "lambda_" + std::to_string(eigen_index);
  g.grad.resize(m);
  for (int j = 0; j < m; ++j) {
    const Complex d = eigenvalue_total_derivative(model, eq, pi, eigen_index, j, backend, &sens);
    if (significant_imag(d)) g.complex_flagged = true;
    g.grad[j] = d.real();
  }
  // Descent direction: the paper's d_lambda = -grad/|grad|.
  return finish_gradient(std::move(g), -1.0);
}

double saddle_distance(const Equilibrium& saddle, const Equilibrium& x0) {
  return (saddle.x - x0.x).norm();
}

ObjectiveGradient saddle_distance_gradient(const ParamModel& model, const Equilibrium& saddle,
                                           const Equilibrium& x0, const Vec& pi,
                                           const DiffBackend& backend) {
  const Mat sens_s = equilibrium_sensitivity(model, saddle, pi, backend);
  const Mat sens_0 = equilibrium_sensitivity(model, x0, pi, backend);
  const Vec diff = saddle.x - x0.x;

  ObjectiveGradient g;
  g.kind = ObjectiveGradient::Kind::SaddleDistance;
  g.label = "saddle_dist";
  // Squared-distance gradient, exactly as the chain rule gives it; the unit
  // ascent direction is unchanged by the squaring.
  g.grad = 2.0 * ((sens_s - sens_0).transpose() * diff);
  return finish_gradient(std::move(g), +1.0);
}

ObjectiveGradient mean_saddle_distance_gradient(const ParamModel& model,
                                                const std::vector<const Equilibrium*>& saddles,
                                                const Equilibrium& x0, const Vec& pi,
                                                const DiffBackend& backend) {
  if (saddles.empty()) throw Error("mean_saddle_distance_gradient: empty saddle list");
  ObjectiveGradient g;
  g.kind = ObjectiveGradient::Kind::SaddleDistance;
  g.label = "mean_saddle_dist";
  g.grad = Vec::Zero(model.param_dim);
  for (const Equilibrium* s : saddles) {
    g.grad += saddle_distance_gradient(model, *s, x0, pi, backend).grad;
  }
  g.grad /= static_cast<double>(saddles.size());
  return finish_gradient(std::move(g), +1.0);
}

}  // namespace basinctl
