#include "basinctl/equilibria.hpp"

#include "basinctl/errors.hpp"
#include "basinctl/log.hpp"
#include "basinctl/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace basinctl {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Stable: return "stable";
    case Classification::Saddle: return "saddle";
    case Classification::Unstable: return "unstable";
    case Classification::NonHyperbolic: return "non_hyperbolic";
  }
  return "?";
}

std::vector<const Equilibrium*> EquilibriumCensus::stable() const {
  std::vector<const Equilibrium*> out;
  for (const auto& e : equilibria)
    if (e.is_stable()) out.push_back(&e);
  return out;
}

std::vector<const Equilibrium*> EquilibriumCensus::saddles() const {
  std::vector<const Equilibrium*> out;
  for (const auto& e : equilibria)
    if (e.is_saddle()) out.push_back(&e);
  return out;
}

Classification classify(const Mat& J, double margin, int* unstable_count) {
  if (!J.allFinite()) throw NonFiniteError("classify: non-finite Jacobian");
  const Eigen::EigenSolver<Mat> es(J, /*computeEigenvectors=*/false);
  const CVec lam = es.eigenvalues();
  int n_pos = 0, n_neg = 0;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i].real() > margin) ++n_pos;
    else if (lam[i].real() < -margin) ++n_neg;
  }
  if (unstable_count) *unstable_count = n_pos;
  if (n_pos + n_neg < lam.size()) return Classification::NonHyperbolic;
  if (n_pos == 0) return Classification::Stable;
  if (n_pos == 1) return Classification::Saddle;
  return Classification::Unstable;
}

namespace {

// Rotate the phase so the largest-magnitude component is real positive;
// makes decompositions comparable across nearby Jacobians.
void canonicalize_phase(CVec& v) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const Complex ph = v[imax] / std::abs(v[imax]);
  v /= ph;
}

struct EigenDecomposition {
  CVec values;
  CMat right;
  CMat left;
};

EigenDecomposition decompose(const Mat& J) {
  const int n = static_cast<int>(J.rows());
  Eigen::EigenSolver<Mat> es_r(J);
  Eigen::EigenSolver<Mat> es_l(J.transpose());
  if (es_r.info() != Eigen::Success || es_l.info() != Eigen::Success)
    throw Error("eigen decomposition failed to converge");

  CVec lam = es_r.eigenvalues();
  CMat V = es_r.eigenvectors();

  // Sort by descending real part (slowest/most unstable first), imag asc.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lam[a].real() != lam[b].real()) return lam[a].real() > lam[b].real();
    return lam[a].imag() < lam[b].imag();
  });

  EigenDecomposition d;
  d.values.resize(n);
  d.right.resize(n, n);
  d.left.resize(n, n);
  const CVec lam_l = es_l.eigenvalues();
  const CMat W = es_l.eigenvectors();
  std::vector<bool> used(n, false);

  for (int i = 0; i < n; ++i) {
    const int ri = order[i];
    d.values[i] = lam[ri];
    CVec v = V.col(ri);
    v.normalize();
    canonicalize_phase(v);
    d.right.col(i) = v;

    // Left eigenvector: pair the transpose's spectrum by eigenvalue proximity.
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dist = std::abs(lam_l[j] - lam[ri]);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    const double tol = 1e-6 * std::max(1.0, std::abs(lam[ri]));
    if (best < 0 || best_dist > tol) {
      std::ostringstream os;
      os << "left/right eigenvalue pairing failed: nearest distance " << best_dist;
      throw Error(os.str());
    }
    used[best] = true;
    CVec w = W.col(best);
    w.normalize();
    canonicalize_phase(w);
    d.left.col(i) = w;
  }
  return d;
}

// Damped Newton with Armijo backtracking on ||F||.
bool newton_solve(const ParamModel& model, const Vec& pi, Vec& x, double tol, int max_iter,
                  const DiffBackend& backend) {
  Vec f;
  try {
    f = eval_field(model, x, pi);
  } catch (const NonFiniteError&) {
    return false;
  }
  double fnorm = f.norm();
  for (int it = 0; it < max_iter; ++it) {
    if (fnorm <= tol) return true;
    Mat J;
    try {
      J = jacobian_x(model, x, pi, backend);
    } catch (const NonFiniteError&) {
      return false;
    }
    const Vec dx = J.partialPivLu().solve(-f);
    if (!dx.allFinite() || dx.norm() > 1e8) return false;

    double t = 1.0;
    bool stepped = false;
    while (t >= 1e-4) {
      const Vec xn = x + t * dx;
      try {
        const Vec fn = eval_field(model, xn, pi);
        const double fn_norm = fn.norm();
        if (fn_norm < (1.0 - 1e-4 * t) * fnorm) {
          x = xn;
          f = fn;
          fnorm = fn_norm;
          stepped = true;
          break;
        }
      } catch (const NonFiniteError&) {
        // shrink and retry
      }
      t *= 0.5;
    }
    if (!stepped) return false;
    if (x.norm() > 1e8) return false;
  }
  return fnorm <= tol;
}

}  // namespace

Equilibrium make_equilibrium(const ParamModel& model, const Vec& x, const Vec& pi,
                             const DiffBackend& backend, const EquilibriumOptions& opts) {
  Equilibrium eq;
  eq.x = x;
  eq.params = pi;
  eq.residual_norm = eval_field(model, x, pi).norm();
  const Mat J = jacobian_x(model, x, pi, backend);
  const EigenDecomposition d = decompose(J);
  eq.eigenvalues = d.values;
  eq.right_eigenvectors = d.right;
  eq.left_eigenvectors = d.left;

  int n_pos = 0, n_neg = 0;
  for (int i = 0; i < d.values.size(); ++i) {
    if (d.values[i].real() > opts.hyperbolicity_margin) ++n_pos;
    else if (d.values[i].real() < -opts.hyperbolicity_margin) ++n_neg;
  }
  eq.unstable_count = n_pos;
  if (n_pos + n_neg < d.values.size()) eq.classification = Classification::NonHyperbolic;
  else if (n_pos == 0) eq.classification = Classification::Stable;
  else if (n_pos == 1) eq.classification = Classification::Saddle;
  else eq.classification = Classification::Unstable;
  return eq;
}

EquilibriumCensus find_equilibria(const ParamModel& model, const Vec& pi, const Box& box,
                                  int n_seeds, std::uint64_t rng_seed, const DiffBackend& backend,
                                  const EquilibriumOptions& opts) {
  if (n_seeds < 1) throw Error("find_equilibria: n_seeds must be >= 1");
  if (box.dim() != model.state_dim) throw Error("find_equilibria: box dimension mismatch");

  const double diam = box.diameter();
  const double dedup_radius = 1e-6 * diam;
  struct Root {
    Vec x;
    double residual;
  };
  std::vector<Root> roots;

  for (int i = 0; i < n_seeds; ++i) {
    Vec x = box.map_unit(halton_point(rng_seed + static_cast<std::uint64_t>(i) + 1,
                                      model.state_dim));
    if (!newton_solve(model, pi, x, opts.newton_tol, opts.newton_max_iter, backend)) continue;
    if (!box.contains(x, 1e-9 * std::max(1.0, diam))) continue;
    const double res = eval_field(model, x, pi).norm();

    bool merged = false;
    for (auto& r : roots) {
      if ((r.x - x).norm() <= dedup_radius) {
        if (res < r.residual) r = {x, res};  // keep the cleaner root
        merged = true;
        break;
      }
    }
    if (!merged) roots.push_back({x, res});
  }
  if (roots.empty())
    throw NoEquilibriumFoundError("find_equilibria: no seed converged in the box for " +
                                  model.name);

  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(), b.x.end());
  });

  EquilibriumCensus census;
  for (const auto& r : roots) {
    Equilibrium eq = make_equilibrium(model, r.x, pi, backend, opts);
    switch (eq.classification) {
      case Classification::Stable: ++census.n_stable; break;
      case Classification::Saddle: ++census.n_saddle; break;
      case Classification::Unstable: ++census.n_unstable; break;
      case Classification::NonHyperbolic: ++census.n_nonhyperbolic; break;
    }
    census.equilibria.push_back(std::move(eq));
  }
  log::debug("census for ", model.name, ": ", census.equilibria.size(), " equilibria (",
             census.n_stable, " stable, ", census.n_saddle, " saddle, ", census.n_unstable,
             " unstable, ", census.n_nonhyperbolic, " non-hyperbolic)");
  return census;
}

Equilibrium continue_equilibrium(const ParamModel& model, const Equilibrium& eq_prev,
                                 const Vec& pi_new, const DiffBackend& backend,
                                 const EquilibriumOptions& opts) {
  const Vec dpi = pi_new - eq_prev.params;

  // Expected root motion from the implicit function theorem bounds the
  // admissible jump; a much larger move means we fell onto another branch.
  const Mat J_prev = jacobian_x(model, eq_prev.x, eq_prev.params, backend);
  const Mat Jpi_prev = jacobian_pi(model, eq_prev.x, eq_prev.params, backend);
  const Mat sens = J_prev.partialPivLu().solve(-Jpi_prev);
  double jump_radius = opts.jump_factor * dpi.norm() * sens.norm();
  if (!std::isfinite(jump_radius)) jump_radius = std::numeric_limits<double>::infinity();

  Vec x = eq_prev.x;
  bool ok;
  try {
    ok = newton_solve(model, pi_new, x, opts.newton_tol, opts.continuation_max_iter, backend);
  } catch (const ParamDomainError&) {
    throw;
  }
  if (!ok)
    throw ContinuationLostError("continuation did not converge within " +
                                std::to_string(opts.continuation_max_iter) + " iterations");
  const double moved = (x - eq_prev.x).norm();
  if (moved > jump_radius + 1e-12 * (1.0 + eq_prev.x.norm())) {
    std::ostringstream os;
    os << "root jumped " << moved << " > allowed " << jump_radius << " (fold suspected)";
    throw ContinuationLostError(os.str());
  }

  Equilibrium eq = make_equilibrium(model, x, pi_new, backend, opts);
  if (eq.classification != eq_prev.classification) {
    throw ClassificationChangedError("equilibrium changed class " +
                                     to_string(eq_prev.classification) + " -> " +
                                     to_string(eq.classification));
  }
  return eq;
}

int match_eigenpair(const Equilibrium& eq_new, const CVec& v_prev, double* overlap_out) {
  const int n = static_cast<int>(eq_new.right_eigenvectors.cols());
  if (v_prev.size() != n) throw Error("match_eigenpair: dimension mismatch");

  int best = 0;
  double best_ov = -1.0, second_ov = -1.0;
  for (int i = 0; i < n; ++i) {
    const double ov = std::abs(eq_new.right_eigenvectors.col(i).dot(v_prev));
    if (ov > best_ov) {
      second_ov = best_ov;
      best_ov = ov;
      best = i;
    } else if (ov > second_ov) {
      second_ov = ov;
    }
  }
  if (overlap_out) *overlap_out = best_ov;
  if (n > 1 && best_ov - second_ov < 0.1) {
    int second = -1;
    double sv = -1.0;
    for (int i = 0; i < n; ++i) {
      if (i == best) continue;
      const double ov = std::abs(eq_new.right_eigenvectors.col(i).dot(v_prev));
      if (ov > sv) {
        sv = ov;
        second = i;
      }
    }
    std::ostringstream os;
    os << "eigenpair match ambiguous: overlaps " << best_ov << " vs " << second_ov;
    throw AmbiguousMatchError(os.str(), best, second);
  }
  return best;
}

}  // namespace basinctl
