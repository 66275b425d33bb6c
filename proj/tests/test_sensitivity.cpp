#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinctl/equilibria.hpp"
#include "basinctl/errors.hpp"
#include "basinctl/models.hpp"
#include "basinctl/sensitivity.hpp"
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

}  // namespace

TEST_CASE("equilibrium_sensitivity: source and ratio models") {
  ParamModel src;
  src.name = "source";
  src.state_dim = 1;
  src.param_dim = 1;
  src.param_names = {"pi"};
  src.field_eval = [](const Vec& x, const Vec& pi) -> Vec { return vec1(pi[0] - x[0]); };
  const Equilibrium eq = make_equilibrium(src, vec1(0.7), vec1(0.7));
  const Mat S = equilibrium_sensitivity(src, eq, vec1(0.7));
  CHECK(S(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

  // x' = pi1 - pi2 x, x* = pi1/pi2, gradient (1/pi2, -pi1/pi2^2).
  ParamModel ratio;
  ratio.name = "ratio";
  ratio.state_dim = 1;
  ratio.param_dim = 2;
  ratio.param_names = {"p1", "p2"};
  ratio.field_eval = [](const Vec& x, const Vec& pi) -> Vec {
    return vec1(pi[0] - pi[1] * x[0]);
  };
  const Equilibrium eq2 = make_equilibrium(ratio, vec1(0.5), vec2(1.0, 2.0));
  const Mat S2 = equilibrium_sensitivity(ratio, eq2, vec2(1.0, 2.0));
  CHECK(S2(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(S2(0, 1) == doctest::Approx(-0.25).epsilon(1e-10));
}

TEST_CASE("equilibrium_sensitivity matches the re-solve oracle on the 2D model") {
  const ParamModel m = make_model_2d();
  const Vec pi = model_2d_default_parameters();
  const Vec x0 = oracles::newton(m, vec2(1.1, 1.3), pi);
  const Equilibrium eq = make_equilibrium(m, x0, pi);
  const Mat S = equilibrium_sensitivity(m, eq, pi);
  for (int j = 0; j < 4; ++j) {
    const Vec col = oracles::fd_equilibrium_sensitivity_column(m, x0, pi, j);
    CHECK((S.col(j) - col).norm() <= 1e-4 * std::max(1.0, col.norm()));
  }
}

TEST_CASE("SingularJacobian near a fold") {
  ParamModel fold;
  fold.name = "fold";
  fold.state_dim = 2;
  fold.param_dim = 1;
  fold.param_names = {"p"};
  fold.field_eval = [](const Vec& x, const Vec& pi) -> Vec {
    return vec2(pi[0] + x[0] * x[0], -x[1]);
  };
  // Just before the fold the Jacobian diag(2x, -1) is almost singular.
  Equilibrium eq;
  eq.x = vec2(1e-13, 0.0);
  eq.params = vec1(-1e-26);
  CHECK_THROWS_AS(equilibrium_sensitivity(fold, eq, vec1(-1e-26)), SingularJacobianError);
}

TEST_CASE("eigenvalue_total_derivative: linear examples") {
  // x' = -a x: lambda = -a, d lambda / d a = -1.
  ParamModel decay;
  decay.name = "decay";
  decay.state_dim = 1;
  decay.param_dim = 1;
  decay.param_names = {"a"};
  decay.field_eval = [](const Vec& x, const Vec& pi) -> Vec { return vec1(-pi[0] * x[0]); };
  const Equilibrium eq = make_equilibrium(decay, vec1(0.0), vec1(1.5));
  const Complex d = eigenvalue_total_derivative(decay, eq, vec1(1.5), 0, 0);
  CHECK(d.real() == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(d.imag()) < 1e-12);

  // x' = pi - x: lambda = -1 independent of pi.
  ParamModel src;
  src.name = "source";
  src.state_dim = 1;
  src.param_dim = 1;
  src.param_names = {"pi"};
  src.field_eval = [](const Vec& x, const Vec& pi) -> Vec { return vec1(pi[0] - x[0]); };
  const Equilibrium eq2 = make_equilibrium(src, vec1(0.3), vec1(0.3));
  CHECK(std::abs(eigenvalue_total_derivative(src, eq2, vec1(0.3), 0, 0)) <= 1e-8);
}

TEST_CASE("eigenvalue derivatives match the continuation oracle on the 2D model") {
  const ParamModel m = make_model_2d();
  const Vec pi = model_2d_default_parameters();
  const Vec x0 = oracles::newton(m, vec2(1.1, 1.3), pi);
  const Equilibrium eq = make_equilibrium(m, x0, pi);

  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Complex d = eigenvalue_total_derivative(m, eq, pi, i, j);

      const double h = 1e-6 * std::max(1.0, std::abs(pi[j]));
      double lam[2];
      int side = 0;
      for (double sgn : {+1.0, -1.0}) {
        Vec p2 = pi;
        p2[j] += sgn * h;
        const Vec x2 = oracles::newton(m, x0, p2);
        const Equilibrium e2 = make_equilibrium(m, x2, p2);
        const int idx = match_eigenpair(e2, eq.right_eigenvectors.col(i), nullptr);
        lam[side++] = e2.eigenvalues[idx].real();
      }
      const double dfd = (lam[0] - lam[1]) / (2.0 * h);
      CHECK(d.real() == doctest::Approx(dfd).epsilon(1e-3));
    }
  }
}

TEST_CASE("eigenvalue_gradient: known linear gradient and unit descent direction") {
  // x' = (3 p1 + 4 p2 - 1) x around x = 0: grad lambda = (3, 4).
  ParamModel lin;
  lin.name = "lin";
  lin.state_dim = 1;
  lin.param_dim = 2;
  lin.param_names = {"p1", "p2"};
  lin.field_eval = [](const Vec& x, const Vec& pi) -> Vec {
    return vec1((3.0 * pi[0] + 4.0 * pi[1] - 1.0) * x[0]);
  };
  const Vec pi = vec2(0.05, 0.05);
  const Equilibrium eq = make_equilibrium(lin, vec1(0.0), pi);
  REQUIRE(eq.classification == Classification::Stable);
  const ObjectiveGradient g = eigenvalue_gradient(lin, eq, pi, 0);
  CHECK(g.grad[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(g.grad[1] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(g.direction[0] == doctest::Approx(-0.6).epsilon(1e-6));
  CHECK(g.direction[1] == doctest::Approx(-0.8).epsilon(1e-6));
  CHECK(g.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // <grad, d> = -|grad| by construction.
  CHECK(g.grad.dot(g.direction) == doctest::Approx(-g.grad.norm()).epsilon(1e-12));
}

TEST_CASE("zero gradient is flagged stationary") {
  ParamModel src;
  src.name = "source";
  src.state_dim = 1;
  src.param_dim = 1;
  src.param_names = {"pi"};
  src.field_eval = [](const Vec& x, const Vec& pi) -> Vec { return vec1(pi[0] - x[0]); };
  const Equilibrium eq = make_equilibrium(src, vec1(0.3), vec1(0.3));
  const ObjectiveGradient g = eigenvalue_gradient(src, eq, vec1(0.3), 0);
  CHECK(g.stationary);
}

TEST_CASE("saddle_distance basics") {
  Equilibrium s, x0;
  s.x = vec2(1.0, 0.0);
  x0.x = vec2(0.0, 0.0);
  CHECK(saddle_distance(s, x0) == doctest::Approx(1.0));
  s.x = x0.x;
  CHECK(saddle_distance(s, x0) == doctest::Approx(0.0));

  const ParamModel m = make_model_1d();
  const Equilibrium saddle = make_equilibrium(m, vec1(0.0), vec1(0.0));
  const Equilibrium stable = make_equilibrium(m, vec1(1.0), vec1(0.0));
  CHECK(saddle_distance(saddle, stable) == doctest::Approx(1.0));
}

TEST_CASE("saddle_distance_gradient: 1D family sign and convention invariance") {
  const ParamModel m = make_model_1d();
  const Vec pi = vec1(0.0);
  const Equilibrium saddle = make_equilibrium(m, vec1(0.0), pi);
  const Equilibrium stable = make_equilibrium(m, vec1(1.0), pi);
  const ObjectiveGradient g = saddle_distance_gradient(m, saddle, stable, pi);

  // Stabilizing feedback moves the boundary away: d(distance)/d(alpha) > 0.
  CHECK(g.grad[0] > 0.0);
  CHECK(g.direction[0] == doctest::Approx(1.0));

  // Oracle on the plain (unsquared) distance: same unit direction.
  const double h = 1e-6;
  const double dp = std::abs(oracles::newton(m, vec1(0.0), vec1(h))[0] -
                             oracles::newton(m, vec1(1.0), vec1(h))[0]);
  const double dm = std::abs(oracles::newton(m, vec1(0.0), vec1(-h))[0] -
                             oracles::newton(m, vec1(1.0), vec1(-h))[0]);
  const double plain = (dp - dm) / (2.0 * h);
  CHECK(plain > 0.0);
  // Squared-distance gradient = 2 * distance * plain gradient.
  CHECK(g.grad[0] == doctest::Approx(2.0 * 1.0 * plain).epsilon(1e-3));
}

TEST_CASE("mean_saddle_distance_gradient: single saddle and cancelling pair") {
  const ParamModel m = make_model_1d();
  const Vec pi = vec1(0.0);
  const Equilibrium saddle = make_equilibrium(m, vec1(0.0), pi);
  const Equilibrium stable = make_equilibrium(m, vec1(1.0), pi);
  const ObjectiveGradient single = saddle_distance_gradient(m, saddle, stable, pi);
  const ObjectiveGradient mean = mean_saddle_distance_gradient(m, {&saddle}, stable, pi);
  CHECK((single.grad - mean.grad).norm() <= 1e-14);

  // x' = x^3 - x + pi x^2: stable at 0, saddles at +-1 with opposite
  // distance gradients that cancel in the mean.
  ParamModel sym;
  sym.name = "sym";
  sym.state_dim = 1;
  sym.param_dim = 1;
  sym.param_names = {"p"};
  sym.field_eval = [](const Vec& x, const Vec& pi) -> Vec {
    return vec1(x[0] * x[0] * x[0] - x[0] + pi[0] * x[0] * x[0]);
  };
  const Equilibrium c = make_equilibrium(sym, vec1(0.0), vec1(0.0));
  const Equilibrium sp = make_equilibrium(sym, vec1(1.0), vec1(0.0));
  const Equilibrium sm = make_equilibrium(sym, vec1(-1.0), vec1(0.0));
  const ObjectiveGradient cancelled = mean_saddle_distance_gradient(sym, {&sp, &sm}, c, vec1(0.0));
  CHECK(cancelled.stationary);
}

TEST_CASE("1D theory signs at alpha = 0") {
  // d lambda(x0)/d alpha < 0: stabilizing feedback deepens the well.
  const ParamModel m = make_model_1d();
  const Equilibrium x0 = make_equilibrium(m, vec1(1.0), vec1(0.0));
  const Complex dl = eigenvalue_total_derivative(m, x0, vec1(0.0), 0, 0);
  CHECK(dl.real() == doctest::Approx(-1.0).epsilon(1e-7));

  // Lower boundary moves down (checked via the saddle-distance gradient
  // above); with the feedback centred on x_ref = -1 the same saddle is the
  // upper boundary and moves up.
  const ParamModel m_neg = make_model_1d(-1.0);
  const Equilibrium saddle = make_equilibrium(m_neg, vec1(0.0), vec1(0.0));
  const Equilibrium stable = make_equilibrium(m_neg, vec1(-1.0), vec1(0.0));
  const ObjectiveGradient g = saddle_distance_gradient(m_neg, saddle, stable, vec1(0.0));
  CHECK(g.grad[0] > 0.0);
}

TEST_CASE("EMT mean saddle distance gradient matches the continuation oracle") {
  const ParamModel m = make_model_emt();
  const EmtParams q = emt_default_params();
  const Vec pi = q.to_vector();
  Box box;
  box.lower = Vec::Zero(4);
  box.upper = q.trapping_bounds().array() + 0.5;
  const EquilibriumCensus census = find_equilibria(m, pi, box, 300, 1);
  REQUIRE(census.n_saddle == 3);
  const auto saddles = census.saddles();

  const Equilibrium* x0 = nullptr;
  for (const auto& e : census.equilibria) {
    if (e.is_stable() && emt_phenotype_label(e.x, q) == "epithelial") x0 = &e;
  }
  REQUIRE(x0 != nullptr);

  const ObjectiveGradient g = mean_saddle_distance_gradient(m, saddles, *x0, pi);

  // Oracle: re-solve all four equilibria at pi +- h e_j and difference the
  // mean squared... the printed convention differentiates the squared
  // distance, so compare against 2*mean(dist * d dist).
  for (int j : {0, 8, 27, 30, 15}) {
    const double h = 1e-6 * std::max(1.0, std::abs(pi[j]));
    double vals[2];
    int side = 0;
    for (double sgn : {+1.0, -1.0}) {
      Vec p2 = pi;
      p2[j] += sgn * h;
      const Vec x0p = oracles::newton(m, x0->x, p2);
      double sum = 0.0;
      for (const auto* s : saddles) {
        const Vec sp = oracles::newton(m, s->x, p2);
        sum += (sp - x0p).squaredNorm();
      }
      vals[side++] = sum / 3.0;
    }
    const double dfd = (vals[0] - vals[1]) / (2.0 * h);
    CHECK(g.grad[j] == doctest::Approx(dfd).epsilon(1e-3));
  }
}
