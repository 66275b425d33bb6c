#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinctl/basin.hpp"
#include "basinctl/models.hpp"
#include "basinctl/rng.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace basinctl;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ParamModel exp_decay() {
  ParamModel m;
  m.name = "decay";
  m.state_dim = 1;
  m.param_dim = 1;
  m.param_names = {"unused"};
  m.field_eval = [](const Vec& x, const Vec&) -> Vec { return vec1(-x[0]); };
  return m;
}

}  // namespace

TEST_CASE("integrate: exponential decay endpoint") {
  const ParamModel m = exp_decay();
  const IntegrateResult r = integrate(m, vec1(0.0), vec1(1.0), 20.0);
  CHECK(r.status == IntegrateStatus::ReachedTMax);
  CHECK(std::abs(r.x[0]) <= std::exp(-20.0) + 1e-6);
  CHECK(r.t == doctest::Approx(20.0));
}

TEST_CASE("integrate: blow-up detection") {
  ParamModel m;
  m.name = "quad";
  m.state_dim = 1;
  m.param_dim = 1;
  m.param_names = {"unused"};
  m.field_eval = [](const Vec& x, const Vec&) -> Vec { return vec1(x[0] * x[0]); };
  const IntegrateResult r = integrate(m, vec1(0.0), vec1(2.0), 10.0);
  CHECK(r.status == IntegrateStatus::BlowUp);
}

TEST_CASE("classification on the 1D family") {
  const ParamModel m = make_model_1d();
  const Box box{vec1(-2.0), vec1(2.0)};
  const EquilibriumCensus census = find_equilibria(m, vec1(0.0), box, 50, 3);

  // From 0.5 the cubic flows to +1 (index 1 of the stable list).
  CHECK(classify_initial_condition(m, vec1(0.0), vec1(0.5), census, box, 200.0) == 1);
  CHECK(classify_initial_condition(m, vec1(0.0), vec1(-0.5), census, box, 200.0) == 0);
  // Starting exactly on an attractor resolves immediately.
  CHECK(classify_initial_condition(m, vec1(0.0), vec1(1.0), census, box, 200.0) == 1);
  // The saddle start may drift either way or stay unresolved; it must not
  // throw.
  CHECK_NOTHROW(classify_initial_condition(m, vec1(0.0), vec1(0.0), census, box, 200.0));
}

TEST_CASE("basin fractions: single attractor takes everything") {
  const ParamModel m = exp_decay();
  const Box box{vec1(-2.0), vec1(2.0)};
  const EquilibriumCensus census = find_equilibria(m, vec1(0.0), box, 20, 1);
  const BasinEstimate est = basin_fractions(m, vec1(0.0), census, box, 200, 9, 100.0);
  REQUIRE(est.fractions.size() == 1);
  CHECK(est.fractions[0] == doctest::Approx(1.0));
  CHECK(est.unresolved_fraction == 0.0);
}

TEST_CASE("basin fractions: cubic splits the box evenly") {
  const ParamModel m = make_model_1d();
  const Box box{vec1(-2.0), vec1(2.0)};
  const EquilibriumCensus census = find_equilibria(m, vec1(0.0), box, 50, 3);
  const BasinEstimate est = basin_fractions(m, vec1(0.0), census, box, 2000, 11, 200.0);
  REQUIRE(est.fractions.size() == 2);
  CHECK(std::abs(est.fractions[0] - 0.5) <= est.ci99_half_widths[0]);
  CHECK(std::abs(est.fractions[1] - 0.5) <= est.ci99_half_widths[1]);

  double total = est.unresolved_fraction;
  for (double f : est.fractions) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimates are deterministic and thread-count independent") {
  const ParamModel m = make_model_1d();
  const Box box{vec1(-2.0), vec1(2.0)};
  const EquilibriumCensus census = find_equilibria(m, vec1(0.0), box, 50, 3);
  const BasinEstimate a = basin_fractions(m, vec1(0.0), census, box, 500, 5, 200.0, {}, 1);
  const BasinEstimate b = basin_fractions(m, vec1(0.0), census, box, 500, 5, 200.0, {}, 1);
  const BasinEstimate c = basin_fractions(m, vec1(0.0), census, box, 500, 5, 200.0, {}, 3);
  CHECK(a.fractions == b.fractions);
  CHECK(a.fractions == c.fractions);
  CHECK(a.unresolved_fraction == c.unresolved_fraction);
}

TEST_CASE("2D: a point near the controlled equilibrium stays, and (2,2) is reproducible") {
  const ParamModel m = make_model_2d();
  const Vec pi = model_2d_default_parameters();
  const Box box{vec2(-3.0, -3.0), vec2(3.0, 3.0)};
  const EquilibriumCensus census = find_equilibria(m, pi, box, 200, 1);

  const Vec eq6 = oracles::newton(m, vec2(1.1, 1.3), pi);
  int target = -1;
  const auto stable = census.stable();
  for (std::size_t i = 0; i < stable.size(); ++i) {
    if ((stable[i]->x - eq6).norm() < 1e-8) target = static_cast<int>(i);
  }
  REQUIRE(target >= 0);
  CHECK(classify_initial_condition(m, pi, eq6 + vec2(0.05, -0.03), census, box, 200.0) == target);

  const int a = classify_initial_condition(m, pi, vec2(2.0, 2.0), census, box, 200.0);
  const int b = classify_initial_condition(m, pi, vec2(2.0, 2.0), census, box, 200.0);
  CHECK(a == b);
  CHECK(a >= 0);
}

TEST_CASE("symmetric 2D variant has mirror-symmetric basin fractions") {
  const ParamModel m = make_model_2d(3, 3);
  Vec pi(4);
  pi << 3.0, 3.0, 0.3, 0.3;
  const Box box{vec2(-3.0, -3.0), vec2(3.0, 3.0)};
  const EquilibriumCensus census = find_equilibria(m, pi, box, 300, 1);
  const auto stable = census.stable();
  REQUIRE(stable.size() >= 2);

  const BasinEstimate est = basin_fractions(m, pi, census, box, 4000, 17, 200.0, {}, 2);
  // Every attractor's mirror (y, x) is also an attractor; their fractions
  // agree within twice the confidence half-width.
  for (std::size_t i = 0; i < stable.size(); ++i) {
    const Vec mirror = vec2(stable[i]->x[1], stable[i]->x[0]);
    int match = -1;
    for (std::size_t j = 0; j < stable.size(); ++j) {
      if ((stable[j]->x - mirror).norm() < 1e-6) match = static_cast<int>(j);
    }
    REQUIRE(match >= 0);
    CHECK(std::abs(est.fractions[i] - est.fractions[match]) <=
          2.0 * (est.ci99_half_widths[i] + est.ci99_half_widths[match]) + 1e-12);
  }
}

TEST_CASE("halving tolerances changes no classification on a fixed probe set") {
  struct Case {
    ParamModel model;
    Vec pi;
    Box box;
    int n_probes;
  };
  std::vector<Case> cases;
  cases.push_back({make_model_1d(), vec1(0.0), {vec1(-2.0), vec1(2.0)}, 100});
  cases.push_back(
      {make_model_2d(), model_2d_default_parameters(), {vec2(-3.0, -3.0), vec2(3.0, 3.0)}, 100});
  {
    const EmtParams q = emt_default_params();
    Box ebox;
    ebox.lower = Vec::Zero(4);
    ebox.upper = Vec::Constant(4, 4.0);
    cases.push_back({make_model_emt(q), q.to_vector(), ebox, 30});
  }

  for (const auto& c : cases) {
    const EquilibriumCensus census = find_equilibria(c.model, c.pi, c.box, 300, 1);
    IntegrateOptions tight;
    tight.rel_tol = 0.5e-8;
    tight.abs_tol = 0.5e-10;
    for (int i = 0; i < c.n_probes; ++i) {
      SampleStream stream(424242, static_cast<std::uint64_t>(i));
      const Vec x0 = stream.next_in_box(c.box);
      const int base = classify_initial_condition(c.model, c.pi, x0, census, c.box, 200.0);
      const int fine = classify_initial_condition(c.model, c.pi, x0, census, c.box, 200.0, tight);
      CHECK(base == fine);
    }
  }
}
