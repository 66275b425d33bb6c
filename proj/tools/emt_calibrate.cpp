// Calibration search for the shipped EMT default parameters.
//
// Procedure: fix the Hill exponent p = 4 and set every half-activation k_j
// to a common value from a coarse grid; draw the interaction strengths and
// source terms uniformly from [0,2]^{11+4} (deterministic per-draw streams);
// accept the first draw whose census in the trapping box is exactly
// 3 stable + 3 saddle + 1 unstable with one stable point per phenotype
// signature (epithelial, senescent, mesenchymal). Draws that provably cannot
// produce the signatures (a source term already above its variable's
// threshold) are skipped without a census.
//
// With --full-check the hit must also survive the downstream pipeline:
// a multi-objective control run (two tangent eigenvalues + mean saddle
// distance, top-3 cone) that terminates in a bifurcation or stall with an
// initial stretch of monotone progress, and a Monte Carlo check that the
// epithelial basin fraction on [0,4]^4 grows.

#include "basinctl/basin.hpp"
#include "basinctl/control.hpp"
#include "basinctl/equilibria.hpp"
#include "basinctl/errors.hpp"
#include "basinctl/models.hpp"
#include "basinctl/rng.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace basinctl;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct CensusResult {
  bool ok = false;
  EquilibriumCensus census;
  Box box;
};

CensusResult try_census(const ParamModel& model, const EmtParams& q, int n_seeds) {
  CensusResult out;
  const Vec bounds = q.trapping_bounds();
  // x_i* >= beta_i even when the source turns negative, and x_i* <= sum of
  // interaction gains plus source.
  Vec betas(4);
  betas << q.beta_S, q.beta_E, q.beta_N, q.beta_P;
  out.box.lower = betas.cwiseMin(0.0).array() - 0.5;
  out.box.upper = bounds.array() + 0.5;
  try {
    out.census = find_equilibria(model, q.to_vector(), out.box, n_seeds, 1);
  } catch (const Error&) {
    return out;
  }
  out.ok = out.census.n_stable == 3 && out.census.n_saddle == 3 && out.census.n_unstable == 1 &&
           out.census.n_nonhyperbolic == 0 &&
           out.census.equilibria.size() == 7;
  return out;
}

bool phenotypes_match(const EquilibriumCensus& census, const EmtParams& q, Vec* epithelial) {
  int n_epi = 0, n_sen = 0, n_mes = 0;
  for (const auto& e : census.equilibria) {
    if (!e.is_stable()) continue;
    const std::string label = emt_phenotype_label(e.x, q);
    if (label == "epithelial") {
      ++n_epi;
      if (epithelial) *epithelial = e.x;
    } else if (label == "senescent") {
      ++n_sen;
    } else if (label == "mesenchymal") {
      ++n_mes;
    }
  }
  return n_epi == 1 && n_sen == 1 && n_mes == 1;
}

void print_params(const EmtParams& q) {
  std::cout << "  alpha = {";
  for (int i = 0; i < 11; ++i) std::cout << (i ? ", " : "") << fmt(q.alpha[i]);
  std::cout << "};\n  k = {";
  for (int i = 0; i < 16; ++i) std::cout << (i ? ", " : "") << fmt(q.k[i]);
  std::cout << "};\n  beta = {" << fmt(q.beta_S) << ", " << fmt(q.beta_E) << ", " << fmt(q.beta_N)
            << ", " << fmt(q.beta_P) << "};  p = " << fmt(q.p) << "\n";
}

bool full_check(const EmtParams& q, const Box& census_box, int n_basin_samples) {
  const ParamModel model = make_model_emt(q);
  const Vec pi0 = q.to_vector();

  CensusResult cr = try_census(model, q, 1600);  // extra seeds: confirm nothing was missed
  if (!cr.ok) {
    std::cout << "    full-check: census unstable under 4x seeds\n";
    return false;
  }
  Vec epithelial;
  if (!phenotypes_match(cr.census, q, &epithelial)) return false;

  Box mc_box0;
  mc_box0.lower = Vec::Zero(4);
  mc_box0.upper = Vec::Constant(4, 4.0);
  {
    const BasinEstimate quick =
        basin_fractions(model, pi0, cr.census, mc_box0, 600, 77, 200.0, {}, 2);
    for (std::size_t i = 0; i < quick.fractions.size(); ++i) {
      if (quick.fractions[i] < 0.02) {
        std::cout << "    full-check: attractor " << i << " basin fraction "
                  << quick.fractions[i] << " too small in [0,4]^4\n";
        return false;
      }
    }
  }

  ControlConfig cc;
  cc.epsilon = 1e-2;
  cc.n_ite = 2000;
  cc.cone = AffineConeSpec::top_k(3);
  cc.census_box = census_box;
  cc.n_seeds = 400;
  cc.rng_seed = 1;

  EigenTargetSpec eigen;
  eigen.auto_tangent = true;
  eigen.delta = 1e9;  // run until an event stops it
  SaddleSelection saddles;  // all saddles

  ControlTrace trace;
  try {
    trace = run_multiobjective_control(model, pi0, epithelial, eigen, saddles, 1e9, cc);
  } catch (const Error& e) {
    std::cout << "    full-check: control threw: " << e.what() << "\n";
    return false;
  }
  const bool event_stop = trace.termination == TerminationReason::Bifurcation ||
                          trace.termination == TerminationReason::Stall;
  int monotone = 0;
  for (std::size_t r = 1; r < trace.records.size(); ++r) {
    const auto& prev = trace.records[r - 1];
    const auto& cur = trace.records[r];
    bool good = true;
    for (std::size_t i = 0; i < cur.eigen_values.size(); ++i)
      good = good && cur.eigen_values[i].real() < prev.eigen_values[i].real() + 1e-12;
    for (std::size_t i = 0; i < cur.distances.size(); ++i)
      good = good && cur.distances[i] > prev.distances[i] - 1e-12;
    if (!good) break;
    ++monotone;
  }
  std::cout << "    full-check: control " << to_string(trace.termination) << " after "
            << trace.iterations << " iterations, monotone prefix " << monotone << "\n";
  if (!event_stop || monotone < 12) return false;

  const Box mc_box = mc_box0;
  const EquilibriumCensus before = cr.census;
  const BasinEstimate b0 = basin_fractions(model, pi0, before, mc_box, n_basin_samples, 99, 200.0,
                                           {}, 2);
  Box after_box = census_box;
  {
    const EmtParams q_after = EmtParams::from_vector(trace.final_pi());
    Vec betas(4);
    betas << q_after.beta_S, q_after.beta_E, q_after.beta_N, q_after.beta_P;
    after_box.lower = after_box.lower.cwiseMin((betas.cwiseMin(0.0).array() - 0.5).matrix());
    after_box.upper = after_box.upper.cwiseMax((q_after.trapping_bounds().array() + 0.5).matrix());
  }
  EquilibriumCensus after;
  try {
    after = find_equilibria(model, trace.final_pi(), after_box, 1600, 1);
  } catch (const Error& e) {
    std::cout << "    full-check: post-control census failed: " << e.what() << "\n";
    return false;
  }
  const BasinEstimate b1 = basin_fractions(model, trace.final_pi(), after, mc_box,
                                           n_basin_samples, 99, 200.0, {}, 2);

  // Identify the epithelial attractor on each side by tracked continuation.
  const Vec epi_final = trace.x0_final.x;
  int i0 = -1, i1 = -1;
  double d0 = 1e300, d1 = 1e300;
  for (std::size_t i = 0; i < b0.attractors.size(); ++i) {
    const double d = (b0.attractors[i] - epithelial).norm();
    if (d < d0) { d0 = d; i0 = static_cast<int>(i); }
  }
  for (std::size_t i = 0; i < b1.attractors.size(); ++i) {
    const double d = (b1.attractors[i] - epi_final).norm();
    if (d < d1) { d1 = d; i1 = static_cast<int>(i); }
  }
  const double grow = b1.fractions[i1] - b0.fractions[i0];
  const double need = b0.ci99_half_widths[i0] + b1.ci99_half_widths[i1];
  std::cout << "    full-check: epithelial fraction " << b0.fractions[i0] << " -> "
            << b1.fractions[i1] << " (needs +" << need << ")\n";
  return grow > need;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMT default-parameter calibration search"};
  std::uint64_t seed = 2022;
  int max_draws = 200000;
  int start_draw = 0;
  int n_seeds = 400;
  int n_basin = 2000;
  bool run_full_check = false;
  int want_hits = 1;
  std::vector<double> k_grid{0.5, 0.4, 0.6, 0.8, 0.3, 1.0};
  app.add_option("--seed", seed, "draw stream seed");
  app.add_option("--max-draws", max_draws, "draws per k value");
  app.add_option("--start-draw", start_draw, "first draw index to try");
  app.add_option("--census-seeds", n_seeds, "Newton seeds per census");
  app.add_option("--k-grid", k_grid, "coarse grid of common half-activation values");
  app.add_option("--hits", want_hits, "stop after this many accepted hits");
  app.add_option("--basin-samples", n_basin, "Monte Carlo samples in --full-check");
  app.add_flag("--full-check", run_full_check, "also require control + basin growth");
  CLI11_PARSE(app, argc, argv);

  int hits = 0;
  for (double kstar : k_grid) {
    std::cout << "=== k* = " << kstar << " ===\n";
    int censused = 0;
    for (int draw = start_draw; draw < max_draws; ++draw) {
      SampleStream stream(seed, static_cast<std::uint64_t>(draw));
      EmtParams q;
      for (int i = 0; i < 11; ++i) q.alpha[i] = 2.0 * stream.next_unit();
      q.k.fill(kstar);
      q.beta_S = 2.0 * stream.next_unit();
      q.beta_E = 2.0 * stream.next_unit();
      q.beta_N = 2.0 * stream.next_unit();
      q.beta_P = 2.0 * stream.next_unit();
      q.p = 4.0;

      // Signature-implied skips: x* >= beta for every variable, so a source
      // above the threshold forbids the required low state; an N trapping
      // bound below the threshold forbids the required high state.
      const Vec thr = q.phenotype_thresholds();
      if (q.beta_S >= thr[0] || q.beta_E >= thr[1] || q.beta_P >= thr[3]) continue;
      const Vec bounds = q.trapping_bounds();
      if (bounds[2] <= thr[2]) continue;

      const ParamModel model = make_model_emt(q);
      ++censused;
      CensusResult cr = try_census(model, q, n_seeds);
      if (!cr.ok) continue;
      if (!phenotypes_match(cr.census, q, nullptr)) continue;

      std::cout << "HIT k*=" << kstar << " draw=" << draw << " (censused " << censused << ")\n";
      print_params(q);
      for (const auto& e : cr.census.equilibria) {
        std::cout << "    " << to_string(e.classification) << "  x = (" << fmt(e.x[0]) << ", "
                  << fmt(e.x[1]) << ", " << fmt(e.x[2]) << ", " << fmt(e.x[3]) << ")  "
                  << emt_phenotype_label(e.x, q) << "\n";
      }
      if (run_full_check && !full_check(q, cr.box, n_basin)) {
        std::cout << "  -> rejected by full check, continuing\n";
        continue;
      }
      if (++hits >= want_hits) return 0;
    }
    std::cout << "  (no acceptable hit for k*=" << kstar << ", censused " << censused << ")\n";
  }
  std::cerr << "no hit found\n";
  return 1;
}
