#include "basinctl/control.hpp"

#include "basinctl/errors.hpp"
#include "basinctl/log.hpp"
#include "basinctl/mgda.hpp"
#include "basinctl/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace basinctl {

std::string to_string(ControlEvent::Type t) {
  switch (t) {
    case ControlEvent::Type::Bifurcation: return "bifurcation";
    case ControlEvent::Type::ComplexOnset: return "complex_onset";
    case ControlEvent::Type::Stall: return "stall";
    case ControlEvent::Type::Goal: return "goal";
    case ControlEvent::Type::CensusChanged: return "census_changed";
    case ControlEvent::Type::AmbiguousEigenMatch: return "ambiguous_eigen_match";
  }
  return "?";
}

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::GoalReached: return "goal_reached";
    case TerminationReason::MaxIterations: return "max_iterations";
    case TerminationReason::Bifurcation: return "bifurcation";
    case TerminationReason::Stall: return "stall";
    case TerminationReason::ComplexEigenvalues: return "complex_eigenvalues";
    case TerminationReason::AmbiguousMatch: return "ambiguous_match";
  }
  return "?";
}

const Equilibrium& select_stable(const EquilibriumCensus& census, const Vec& anchor) {
  const Equilibrium* best = nullptr;
  double d_best = std::numeric_limits<double>::infinity();
  double d_second = std::numeric_limits<double>::infinity();
  for (const auto& e : census.equilibria) {
    if (!e.is_stable()) continue;
    const double d = (e.x - anchor).norm();
    if (d < d_best) {
      d_second = d_best;
      d_best = d;
      best = &e;
    } else if (d < d_second) {
      d_second = d;
    }
  }
  if (!best) throw SelectorError("selector: census contains no stable equilibrium");
  if (std::isfinite(d_second) && d_second - d_best <= 1e-6 * std::max(1.0, d_second)) {
    std::ostringstream os;
    os << "selector: two stable equilibria equidistant from anchor (" << d_best << " vs "
       << d_second << ")";
    throw SelectorError(os.str());
  }
  return *best;
}

std::vector<const Equilibrium*> select_saddles(const EquilibriumCensus& census,
                                               const Equilibrium& x0, const SaddleSelection& sel) {
  std::vector<const Equilibrium*> all = census.saddles();
  std::sort(all.begin(), all.end(), [&](const Equilibrium* a, const Equilibrium* b) {
    return (a->x - x0.x).norm() < (b->x - x0.x).norm();
  });
  std::vector<const Equilibrium*> out;
  switch (sel.mode) {
    case SaddleSelection::Mode::AllSaddles:
      out = all;
      break;
    case SaddleSelection::Mode::NearestK:
      out.assign(all.begin(), all.begin() + std::min<std::size_t>(sel.k, all.size()));
      break;
    case SaddleSelection::Mode::Anchors: {
      std::set<const Equilibrium*> chosen;
      for (const Vec& anchor : sel.anchors) {
        const Equilibrium* best = nullptr;
        double d_best = std::numeric_limits<double>::infinity();
        for (const Equilibrium* s : all) {
          const double d = (s->x - anchor).norm();
          if (d < d_best) {
            d_best = d;
            best = s;
          }
        }
        if (best) chosen.insert(best);
      }
      for (const Equilibrium* s : all)
        if (chosen.count(s)) out.push_back(s);
      break;
    }
  }
  if (out.empty()) throw SelectorError("selector: no saddle matched the selection");
  return out;
}

std::vector<int> select_tangent_eigen_indices(const Equilibrium& x0,
                                              const std::vector<const Equilibrium*>& saddles) {
  std::set<int> indices;
  for (const Equilibrium* s : saddles) {
    const Vec dir = s->x - x0.x;
    if (dir.norm() <= 0.0) continue;
    const CVec u = (dir / dir.norm()).cast<Complex>();
    int best = 0;
    double best_ov = -1.0;
    for (int j = 0; j < x0.right_eigenvectors.cols(); ++j) {
      const double ov = std::abs(x0.right_eigenvectors.col(j).dot(u));
      if (ov > best_ov) {
        best_ov = ov;
        best = j;
      }
    }
    indices.insert(best);
  }
  return {indices.begin(), indices.end()};
}

namespace {

constexpr double kComplexTol = 1e-9;

bool has_imag(const Complex& z) {
  return std::abs(z.imag()) > kComplexTol * std::max(1.0, std::abs(z.real()));
}

struct EigenTargetState {
  int index = 0;       // current eigen index in the tracked equilibrium
  CVec v_ref;          // eigenvector followed across iterations
  Complex lambda0;
  Complex lambda_now;
  double overlap = 1.0;
  bool complex_now = false;
  double delta = 1.0;
};

struct DistanceObjective {
  std::vector<int> saddle_slots; // indices into tracked list
  double g0 = 0.0;
  double g_now = 0.0;
  double delta = 0.0;
  std::string label;
};

struct Tracked {
  std::string label;
  Equilibrium eq;
  bool essential = false; // losing it ends the run (target or objective saddle)
  bool lost = false;
};

struct Engine {
  const ParamModel& model;
  const ControlConfig& config;
  ControlTrace trace;
  Vec pi;

  std::vector<Tracked> tracked; // slot 0 is always x0
  std::vector<EigenTargetState> eigen_targets;
  std::vector<DistanceObjective> distance_objectives;
  std::vector<ControlEvent> pending;
  EquilibriumCensus initial_census;

  Engine(const ParamModel& m, const ControlConfig& c) : model(m), config(c) {}

  const Equilibrium& x0() const { return tracked[0].eq; }

  // Mean over the surviving saddles; a lost saddle drops out of the mean
  // (the trace shows the jump), NaN once none survive.
  double distance_value(const DistanceObjective& d) const {
    double sum = 0.0;
    int alive = 0;
    for (int slot : d.saddle_slots) {
      if (tracked[slot].lost) continue;
      sum += (tracked[slot].eq.x - x0().x).norm();
      ++alive;
    }
    if (alive == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum / alive;
  }

  bool stable_companion_loss_fatal = false;

  void setup(const Vec& pi0, const Vec& anchor, const EigenTargetSpec& eigen,
             const SaddleSelection* saddle_sel, bool per_saddle_objectives, double delta_g,
             bool stable_loss_fatal) {
    pi = pi0;
    stable_companion_loss_fatal = stable_loss_fatal;
    initial_census = find_equilibria(model, pi, config.census_box, config.n_seeds,
                                     config.rng_seed, config.backend, config.eq_opts);
    const Equilibrium& x0_eq = select_stable(initial_census, anchor);
    tracked.push_back({"x0", x0_eq, /*essential=*/true});
    trace.x0_initial = x0_eq;

    std::vector<const Equilibrium*> saddles;
    if (saddle_sel) {
      saddles = select_saddles(initial_census, x0_eq, *saddle_sel);
      for (std::size_t i = 0; i < saddles.size(); ++i) {
        // Per-saddle objectives (strategies 3-4) die with their saddle; the
        // combined mean objective instead drops a lost saddle and carries on.
        tracked.push_back({"saddle_" + std::to_string(i), *saddles[i],
                           /*essential=*/per_saddle_objectives});
      }
    }
    // Companions: the rest of the census, continued for re-scan matching and
    // bifurcation reporting.
    for (const auto& e : initial_census.equilibria) {
      if (&e == &x0_eq) continue;
      bool is_objective_saddle = false;
      for (const Equilibrium* s : saddles) is_objective_saddle |= (s == &e);
      if (is_objective_saddle) continue;
      tracked.push_back({to_string(e.classification) + "_" + emt_label_or_index(e), e, false});
    }

    if (!eigen.empty()) {
      std::vector<int> indices = eigen.indices;
      if (eigen.auto_tangent) {
        if (saddles.empty()) throw Error("auto tangent eigen selection needs saddles");
        indices = select_tangent_eigen_indices(x0_eq, saddles);
      }
      for (int idx : indices) {
        if (idx < 0 || idx >= model.state_dim) throw Error("eigen target index out of range");
        EigenTargetState t;
        t.index = idx;
        t.v_ref = x0_eq.right_eigenvectors.col(idx);
        t.lambda0 = t.lambda_now = x0_eq.eigenvalues[idx];
        t.complex_now = has_imag(t.lambda0);
        t.delta = eigen.delta;
        eigen_targets.push_back(std::move(t));
        trace.eigen_indices.push_back(idx);
        trace.objective_labels.push_back("lambda_" + std::to_string(idx));
        trace.initial_eigen_values.push_back(x0_eq.eigenvalues[idx]);
      }
    }

    if (saddle_sel && delta_g >= 0.0) {
      if (per_saddle_objectives) {
        for (std::size_t i = 0; i < saddles.size(); ++i) {
          DistanceObjective d;
          d.saddle_slots = {static_cast<int>(i) + 1};
          d.delta = delta_g;
          d.label = "saddle_dist_" + std::to_string(i);
          d.g0 = d.g_now = distance_value(d);
          distance_objectives.push_back(std::move(d));
        }
      } else {
        DistanceObjective d;
        for (std::size_t i = 0; i < saddles.size(); ++i)
          d.saddle_slots.push_back(static_cast<int>(i) + 1);
        d.delta = delta_g;
        d.label = "mean_saddle_dist";
        d.g0 = d.g_now = distance_value(d);
        distance_objectives.push_back(std::move(d));
      }
      for (const auto& d : distance_objectives) {
        trace.objective_labels.push_back(d.label);
        trace.initial_distances.push_back(d.g0);
      }
    }
  }

  // Eigenvector-continuity matching with fallbacks for the awkward cases a
  // non-normal Jacobian produces: near-parallel eigenvectors keep the
  // runner-up overlap permanently high, and a collision into a complex pair
  // splits the overlap evenly between two branches with the same Re(lambda).
  // Returns -1 (and records the event) when no candidate is trustworthy.
  int resolve_eigen_match(const EigenTargetState& et, const std::set<int>& claimed) {
    const Equilibrium& eq = tracked[0].eq;
    const int n = static_cast<int>(eq.right_eigenvectors.cols());
    std::vector<std::pair<double, int>> by_overlap;
    for (int i = 0; i < n; ++i) {
      by_overlap.emplace_back(std::abs(eq.right_eigenvectors.col(i).dot(et.v_ref)), i);
    }
    std::sort(by_overlap.begin(), by_overlap.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    int cand = -1;
    double cand_ov = 0.0, next_ov = 0.0;
    for (const auto& [ov, i] : by_overlap) {
      if (claimed.count(i)) continue;
      if (cand < 0) {
        cand = i;
        cand_ov = ov;
      } else {
        next_ov = ov;
        break;
      }
    }
    if (cand < 0) {
      pending.push_back({ControlEvent::Type::AmbiguousEigenMatch, "all eigen indices claimed"});
      return -1;
    }
    if (cand_ov - next_ov >= 0.1) return cand;   // clear margin
    if (cand_ov >= 0.95) return cand;            // decisive in absolute terms
    // Collision into a conjugate pair: both members carry the controlled
    // Re(lambda), so either branch continues the target.
    const Complex lc = eq.eigenvalues[cand];
    for (const auto& [ov, i] : by_overlap) {
      if (i == cand) continue;
      if (std::abs(lc - std::conj(eq.eigenvalues[i])) <= 1e-6 * std::max(1.0, std::abs(lc)) &&
          cand_ov >= 0.5) {
        return cand;
      }
      break;
    }
    std::ostringstream os;
    os << "eigen target match unclear: overlaps " << cand_ov << " vs " << next_ov;
    pending.push_back({ControlEvent::Type::AmbiguousEigenMatch, os.str()});
    return -1;
  }

  std::string emt_label_or_index(const Equilibrium& e) const {
    // Stable companions are labelled by census position; enough to identify
    // them in events without model-specific naming.
    for (std::size_t i = 0; i < initial_census.equilibria.size(); ++i) {
      if (&initial_census.equilibria[i] == &e) return std::to_string(i);
    }
    return "?";
  }

  bool goal_met() const {
    for (const auto& t : eigen_targets) {
      if (!(t.lambda_now.real() - t.lambda0.real() <= -t.delta)) return false;
    }
    for (const auto& d : distance_objectives) {
      if (!(d.g_now - d.g0 >= d.delta)) return false;
    }
    return true;
  }

  TraceRecord snapshot(int iteration) const {
    TraceRecord rec;
    rec.iteration = iteration;
    rec.pi = pi;
    for (const auto& t : eigen_targets) {
      rec.eigen_values.push_back(t.lambda_now);
      rec.overlaps.push_back(t.overlap);
    }
    for (const auto& d : distance_objectives) rec.distances.push_back(d.g_now);
    return rec;
  }

  void invalidate_values() {
    const Complex cnan(std::numeric_limits<double>::quiet_NaN(), 0.0);
    for (auto& t : eigen_targets) t.lambda_now = cnan;
    for (auto& d : distance_objectives) d.g_now = std::numeric_limits<double>::quiet_NaN();
  }

  ControlTrace finish(TraceRecord rec, TerminationReason reason, int updates,
                      bool include_record = true) {
    rec.direction = Vec();
    if (include_record) trace.records.push_back(std::move(rec));
    trace.termination = reason;
    trace.final_parameters = pi;
    trace.iterations = updates;
    trace.x0_final = tracked[0].eq;
    for (const auto& t : tracked) {
      if (!t.lost && t.eq.is_stable()) trace.tracked_final_stable.push_back(t.eq);
    }
    log::info("control on ", model.name, ": ", to_string(reason), " after ", updates,
              " iterations");
    return std::move(trace);
  }

  ControlTrace run() {
    int t = 0;
    while (true) {
      TraceRecord rec = snapshot(t);
      rec.events = std::move(pending);
      pending.clear();

      if (goal_met()) {
        rec.events.push_back({ControlEvent::Type::Goal, "all targets met"});
        return finish(std::move(rec), TerminationReason::GoalReached, t);
      }
      if (t >= config.n_ite) {
        // An n_ite = 0 run that never met its goal does nothing and reports
        // nothing: the written trace is header-only.
        return finish(std::move(rec), TerminationReason::MaxIterations, t,
                      /*include_record=*/config.n_ite > 0);
      }

      // Assemble objective gradients in minimization form.
      std::vector<Vec> grads;
      std::vector<int> active; // objective index per gradient
      try {
        int obj = 0;
        for (auto& et : eigen_targets) {
          ObjectiveGradient g =
              eigenvalue_gradient(model, tracked[0].eq, pi, et.index, config.backend);
          if (!g.stationary) {
            grads.push_back(g.grad);
            active.push_back(obj);
          }
          ++obj;
        }
        for (auto& d : distance_objectives) {
          std::vector<const Equilibrium*> sds;
          for (int slot : d.saddle_slots)
            if (!tracked[slot].lost) sds.push_back(&tracked[slot].eq);
          if (!sds.empty()) {
            ObjectiveGradient g =
                mean_saddle_distance_gradient(model, sds, tracked[0].eq, pi, config.backend);
            if (!g.stationary) {
              grads.push_back(-g.grad); // ascent objective -> minimization form
              active.push_back(obj);
            }
          }
          ++obj;
        }
      } catch (const SingularJacobianError& e) {
        rec.events.push_back({ControlEvent::Type::Bifurcation, e.what()});
        return finish(std::move(rec), TerminationReason::Bifurcation, t);
      }

      if (grads.empty()) {
        rec.events.push_back({ControlEvent::Type::Stall, "all objectives stationary"});
        return finish(std::move(rec), TerminationReason::Stall, t);
      }
      if (config.normalize_gradients) {
        for (Vec& g : grads) g /= g.norm();
      }

      const HullSolution hull = min_norm_hull_point(grads);
      if (hull.is_pareto_stationary) {
        rec.events.push_back({ControlEvent::Type::Stall, "pareto stationary"});
        return finish(std::move(rec), TerminationReason::Stall, t);
      }
      const Vec d_raw = -hull.direction / hull.norm;
      Vec d_tilde;
      try {
        d_tilde = cone_project(d_raw, config.cone);
      } catch (const EmptyProjectionError& e) {
        rec.events.push_back({ControlEvent::Type::Stall, e.what()});
        return finish(std::move(rec), TerminationReason::Stall, t);
      }

      rec.direction = d_tilde;
      rec.weights.assign(eigen_targets.size() + distance_objectives.size(), 0.0);
      for (std::size_t i = 0; i < active.size(); ++i) rec.weights[active[i]] = hull.weights[i];
      trace.records.push_back(rec);

      // Parameter update and continuation of every tracked equilibrium.
      pi += config.epsilon * d_tilde;
      ++t;

      bool bifurcated = false;
      bool domain_stall = false;
      std::string domain_detail;
      for (auto& tr : tracked) {
        if (tr.lost) continue;
        try {
          tr.eq = continue_equilibrium(model, tr.eq, pi, config.backend, config.eq_opts);
        } catch (const ContinuationLostError& e) {
          pending.push_back({ControlEvent::Type::Bifurcation, tr.label + ": " + e.what()});
          tr.lost = true;
          if (tr.essential || (stable_companion_loss_fatal && tr.eq.is_stable()))
            bifurcated = true;
        } catch (const ClassificationChangedError& e) {
          pending.push_back({ControlEvent::Type::Bifurcation, tr.label + ": " + e.what()});
          tr.lost = true;
          if (tr.essential || (stable_companion_loss_fatal && tr.eq.is_stable()))
            bifurcated = true;
        } catch (const ParamDomainError& e) {
          domain_stall = true;
          domain_detail = e.what();
          break;
        }
      }
      if (domain_stall) {
        invalidate_values();
        TraceRecord terminal = snapshot(t);
        terminal.events = std::move(pending);
        pending.clear();
        terminal.events.push_back({ControlEvent::Type::Stall, "parameter domain: " + domain_detail});
        return finish(std::move(terminal), TerminationReason::Stall, t);
      }

      // Refresh objective values that are still computable.
      if (!tracked[0].lost) {
        std::set<int> claimed;
        bool ambiguous_fatal = false;
        for (auto& et : eigen_targets) {
          const int idx = resolve_eigen_match(et, claimed);
          if (idx < 0) {
            ambiguous_fatal = true;
            break;
          }
          const double ov = std::abs(tracked[0].eq.right_eigenvectors.col(idx).dot(et.v_ref));
          claimed.insert(idx);
          et.index = idx;
          et.v_ref = tracked[0].eq.right_eigenvectors.col(idx);
          et.overlap = ov;
          et.lambda_now = tracked[0].eq.eigenvalues[idx];
          const bool complex_now = has_imag(et.lambda_now);
          if (complex_now && !et.complex_now) {
            std::ostringstream os;
            os << "lambda_" << et.index << " acquired imaginary part " << et.lambda_now.imag();
            pending.push_back({ControlEvent::Type::ComplexOnset, os.str()});
          }
          et.complex_now = complex_now;
        }
        if (ambiguous_fatal) {
          TraceRecord terminal = snapshot(t);
          terminal.events = std::move(pending);
          pending.clear();
          return finish(std::move(terminal), TerminationReason::AmbiguousMatch, t);
        }
        if (config.complex_fatal) {
          for (const auto& et : eigen_targets) {
            if (et.complex_now) {
              TraceRecord terminal = snapshot(t);
              terminal.events = std::move(pending);
              pending.clear();
              return finish(std::move(terminal), TerminationReason::ComplexEigenvalues, t);
            }
          }
        }
      }
      for (auto& d : distance_objectives) {
        bool computable = !tracked[0].lost;
        for (int slot : d.saddle_slots) computable = computable && !tracked[slot].lost;
        d.g_now = computable ? distance_value(d) : std::numeric_limits<double>::quiet_NaN();
      }

      if (bifurcated && config.stop_on_bifurcation) {
        TraceRecord terminal = snapshot(t);
        terminal.events = std::move(pending);
        pending.clear();
        return finish(std::move(terminal), TerminationReason::Bifurcation, t);
      }

      // Periodic full re-scan: guards against births continuation cannot
      // see. Losses are the continuation guard's job (a converged continued
      // root proves the equilibrium still exists; a re-scan can only fail to
      // find it), so unmatched new roots are reported, never treated as
      // proof of a vanished one.
      if (config.rescan_every > 0 && t % config.rescan_every == 0) {
        try {
          const EquilibriumCensus now =
              find_equilibria(model, pi, config.census_box, config.n_seeds, config.rng_seed,
                              config.backend, config.eq_opts);
          const double match_radius = 1e-3 * config.census_box.diameter();
          int births = 0;
          for (const auto& root : now.equilibria) {
            bool known = false;
            for (const auto& tr : tracked) {
              if (!tr.lost && (tr.eq.x - root.x).norm() <= match_radius) known = true;
            }
            for (const auto& init : initial_census.equilibria) {
              if ((init.x - root.x).norm() <= match_radius) known = true;
            }
            if (!known) ++births;
          }
          if (births > 0) {
            std::ostringstream os;
            os << births << " new equilibria appeared (census now " << now.n_stable << "S/"
               << now.n_saddle << "sd/" << now.n_unstable << "U)";
            pending.push_back({ControlEvent::Type::CensusChanged, os.str()});
          }
        } catch (const NoEquilibriumFoundError& e) {
          pending.push_back({ControlEvent::Type::CensusChanged, e.what()});
        }
      }
    }
  }
};

}  // namespace

ControlTrace run_eigenvalue_control(const ParamModel& model, const Vec& pi0, const Vec& anchor,
                                    const EigenTargetSpec& eigen, const ControlConfig& config) {
  if (eigen.empty()) throw Error("run_eigenvalue_control: no eigen targets");
  Engine engine(model, config);
  engine.setup(pi0, anchor, eigen, nullptr, false, -1.0, /*stable_loss_fatal=*/false);
  return engine.run();
}

ControlTrace run_saddle_control(const ParamModel& model, const Vec& pi0, const Vec& anchor,
                                const SaddleSelection& saddles, double delta_g,
                                const ControlConfig& config) {
  Engine engine(model, config);
  EigenTargetSpec no_eigen;
  engine.setup(pi0, anchor, no_eigen, &saddles, /*per_saddle=*/true, delta_g,
               /*stable_loss_fatal=*/false);
  return engine.run();
}

ControlTrace run_multiobjective_control(const ParamModel& model, const Vec& pi0, const Vec& anchor,
                                        const EigenTargetSpec& eigen,
                                        const SaddleSelection& saddles, double delta_g_mean,
                                        const ControlConfig& config) {
  Engine engine(model, config);
  engine.setup(pi0, anchor, eigen, &saddles, /*per_saddle=*/false, delta_g_mean,
               /*stable_loss_fatal=*/true);
  return engine.run();
}

}  // namespace basinctl
