#include "basinctl/basin.hpp"

#include "basinctl/errors.hpp"
#include "basinctl/log.hpp"
#include "basinctl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace basinctl {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 4th-order embedded weights.
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

int capture_index(const Vec& x, const std::vector<AttractorTarget>& attractors, double radius) {
  int hit = -1;
  int count = 0;
  for (std::size_t i = 0; i < attractors.size(); ++i) {
    if ((x - attractors[i].x).norm() <= radius) {
      ++count;
      hit = static_cast<int>(i);
    }
  }
  return count == 1 ? hit : (count > 1 ? -2 : -1);
}

}  // namespace

IntegrateResult integrate(const ParamModel& model, const Vec& pi, const Vec& x0, double t_max,
                          const IntegrateOptions& opts,
                          const std::vector<AttractorTarget>* attractors) {
  if (!(t_max > 0.0)) throw Error("integrate: t_max must be positive");

  IntegrateResult res;
  Vec x = x0;
  double t = 0.0;
  Vec f1 = eval_field(model, x, pi);
  double h = 0.01 * (1.0 + x.norm()) / (1.0 + f1.norm());
  h = std::min(h, t_max);

  if (attractors && f1.norm() < opts.field_tol) {
    const int hit = capture_index(x, *attractors, opts.capture_radius);
    if (hit >= 0) {
      res.x = x;
      res.status = IntegrateStatus::Converged;
      res.attractor = hit;
      return res;
    }
  }

  // Near an attractor the error estimate no longer limits h: the solution is
  // flat, so accepted steps can leave the explicit method's stability region
  // and the iterate stalls at the tolerance floor instead of contracting.
  // Capping h by the nearest attractor's fastest decay rate keeps the step
  // stable so the trajectory actually lands on the equilibrium.
  const auto stable_step_cap = [&](const Vec& xc) {
    if (!attractors || attractors->empty()) return std::numeric_limits<double>::infinity();
    double d_min = std::numeric_limits<double>::infinity();
    double rate = 1.0;
    for (const auto& a : *attractors) {
      const double d = (xc - a.x).norm();
      if (d < d_min) {
        d_min = d;
        rate = a.decay_rate;
      }
    }
    return 2.0 / std::max(rate, 1e-12);
  };

  Vec k2, k3, k4, k5, k6, f_new, x_new;
  while (t < t_max) {
    if (x.norm() > opts.blowup_norm) {
      res.x = x;
      res.t = t;
      res.status = IntegrateStatus::BlowUp;
      return res;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) break;  // step collapse; give up at current state
    h = std::min(h, stable_step_cap(x));
    if (t + h > t_max) h = t_max - t;

    k2 = eval_field(model, x + h * (a21 * f1), pi);
    k3 = eval_field(model, x + h * (a31 * f1 + a32 * k2), pi);
    k4 = eval_field(model, x + h * (a41 * f1 + a42 * k2 + a43 * k3), pi);
    k5 = eval_field(model, x + h * (a51 * f1 + a52 * k2 + a53 * k3 + a54 * k4), pi);
    k6 = eval_field(model, x + h * (a61 * f1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), pi);
    x_new = x + h * (b1 * f1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f_new = eval_field(model, x_new, pi);  // FSAL stage

    const Vec x_low =
        x + h * (e1 * f1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f_new);
    double err2 = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      const double scale =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(x[i]), std::abs(x_new[i]));
      const double e = (x_new[i] - x_low[i]) / scale;
      err2 += e * e;
    }
    const double err = std::sqrt(err2 / x.size());

    if (err <= 1.0) {
      t += h;
      x = x_new;
      f1 = f_new;
      ++res.n_steps;
      if (attractors && f1.norm() < opts.field_tol) {
        const int hit = capture_index(x, *attractors, opts.capture_radius);
        if (hit >= 0) {
          res.x = x;
          res.t = t;
          res.status = IntegrateStatus::Converged;
          res.attractor = hit;
          return res;
        }
      }
    }
    const double factor =
        (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  res.x = x;
  res.t = t;
  res.status = IntegrateStatus::ReachedTMax;
  return res;
}

int classify_initial_condition(const ParamModel& model, const Vec& pi, const Vec& x0,
                               const EquilibriumCensus& census, const Box& box, double t_max,
                               const IntegrateOptions& opts) {
  const auto stable = census.stable();
  if (stable.empty()) throw Error("classify_initial_condition: census has no stable equilibrium");
  std::vector<AttractorTarget> attractors;
  attractors.reserve(stable.size());
  for (const Equilibrium* e : stable) {
    double rate = 1.0;
    for (int i = 0; i < e->eigenvalues.size(); ++i)
      rate = std::max(rate, std::abs(e->eigenvalues[i].real()));
    attractors.push_back({e->x, rate});
  }

  IntegrateOptions local = opts;
  local.capture_radius = 1e-4 * box.diameter();

  try {
    const IntegrateResult r = integrate(model, pi, x0, t_max, local, &attractors);
    return r.status == IntegrateStatus::Converged ? r.attractor : kUnresolved;
  } catch (const NonFiniteError&) {
    return kUnresolved;
  }
}

BasinEstimate basin_fractions(const ParamModel& model, const Vec& pi,
                              const EquilibriumCensus& census, const Box& box, int n_samples,
                              std::uint64_t rng_seed, double t_max, const IntegrateOptions& opts,
                              int n_threads) {
  if (n_samples < 1) throw Error("basin_fractions: n_samples must be >= 1");
  const auto stable = census.stable();
  if (stable.empty()) throw Error("basin_fractions: census has no stable equilibrium");

  BasinEstimate est;
  for (const Equilibrium* e : stable) est.attractors.push_back(e->x);
  est.n_samples = n_samples;
  est.rng_seed = rng_seed;
  est.box = box;

  std::vector<int> result(n_samples, kUnresolved);
  auto worker = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      SampleStream stream(rng_seed, static_cast<std::uint64_t>(i));
      const Vec x0 = stream.next_in_box(box);
      result[i] = classify_initial_condition(model, pi, x0, census, box, t_max, opts);
    }
  };

  n_threads = std::max(1, n_threads);
  if (n_threads == 1) {
    worker(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_samples + n_threads - 1) / n_threads;
    for (int th = 0; th < n_threads; ++th) {
      const int begin = th * chunk;
      const int end = std::min(n_samples, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<int> counts(stable.size(), 0);
  int unresolved = 0;
  for (int r : result) {
    if (r >= 0) ++counts[r];
    else ++unresolved;
  }

  // 99% two-sided normal quantile for the binomial half-widths.
  constexpr double z99 = 2.5758293035489004;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = static_cast<double>(counts[i]) / n_samples;
    est.fractions.push_back(p);
    est.ci99_half_widths.push_back(z99 * std::sqrt(p * (1.0 - p) / n_samples));
  }
  est.unresolved_fraction = static_cast<double>(unresolved) / n_samples;
  return est;
}

}  // namespace basinctl
