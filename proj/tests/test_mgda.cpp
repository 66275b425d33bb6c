#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinctl/errors.hpp"
#include "basinctl/mgda.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace basinctl;

namespace {

Vec make_vec(std::initializer_list<double> vals) {
  Vec v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("min_norm_hull_point: closed-form cases") {
  const Vec g = make_vec({1.0, 2.0, 2.0});

  SUBCASE("single gradient is returned unchanged") {
    const HullSolution s = min_norm_hull_point({g});
    CHECK(s.weights == std::vector<double>{1.0});
    CHECK((s.direction - g).norm() == doctest::Approx(0.0));
    CHECK_FALSE(s.is_pareto_stationary);
  }

  SUBCASE("opposing gradients cancel to a Pareto-stationary point") {
    const HullSolution s = min_norm_hull_point({g, -g});
    CHECK(s.norm <= 1e-12);
    CHECK(s.is_pareto_stationary);
  }

  SUBCASE("orthogonal unit vectors split evenly") {
    const HullSolution s = min_norm_hull_point({make_vec({1, 0, 0}), make_vec({0, 1, 0})});
    CHECK(s.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.direction[0] == doctest::Approx(0.5));
    CHECK(s.direction[1] == doctest::Approx(0.5));
    CHECK(s.norm == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("min-norm optimality and simplex validity on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> kd(1, 6), md(2, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = kd(rng), m = md(rng);
    std::vector<Vec> g;
    for (int i = 0; i < k; ++i) g.push_back(oracles::random_vec(rng, m));
    const HullSolution s = min_norm_hull_point(g);

    double wsum = 0.0;
    for (double w : s.weights) {
      CHECK(w >= -1e-12);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));

    // First-order optimality of the min-norm point.
    for (const Vec& gi : g) {
      CHECK(s.direction.dot(gi) >= s.direction.squaredNorm() - 1e-9);
    }
    // Common-descent property: stepping along -omega decreases every
    // objective to first order.
    if (!s.is_pareto_stationary) {
      for (const Vec& gi : g) CHECK((-s.direction).dot(gi) < 0.0);
    }
  }
}

TEST_CASE("min-norm beats a dense simplex grid (k <= 3)") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> kd(1, 3), md(2, 4);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = kd(rng), m = md(rng);
    std::vector<Vec> g;
    for (int i = 0; i < k; ++i) g.push_back(oracles::random_vec(rng, m));
    const HullSolution s = min_norm_hull_point(g);
    const double grid = oracles::simplex_grid_min_norm(g, 5e-3);
    CHECK(grid >= s.norm - 1e-6);
  }
}

TEST_CASE("projected-gradient path (k > 3) agrees with face enumeration") {
  // Split a 3-gradient instance into k=4 by duplicating one gradient: the
  // optimum value must be identical.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> g;
    for (int i = 0; i < 3; ++i) g.push_back(oracles::random_vec(rng, 4));
    const HullSolution exact = min_norm_hull_point(g);
    std::vector<Vec> g4 = g;
    g4.push_back(g[0]);
    const HullSolution pgd = min_norm_hull_point(g4);
    CHECK(pgd.norm == doctest::Approx(exact.norm).epsilon(1e-8));
  }
}

TEST_CASE("cone_project: full, subset, sign, top-k") {
  const Vec d = make_vec({0.6, -0.8});

  SUBCASE("full cone is the identity on unit vectors") {
    const Vec p = cone_project(d, AffineConeSpec::full());
    CHECK((p - d).norm() <= 1e-15);
  }

  SUBCASE("coordinate subset keeps only the allowed axis") {
    const Vec p = cone_project(d, AffineConeSpec::subset({0}));
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == 0.0);
  }

  SUBCASE("sign constraints zero the violating coordinates") {
    const Vec p = cone_project(d, AffineConeSpec::sign_constrained({1, 1}));
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == 0.0);
  }

  SUBCASE("top-k keeps the largest absolute components") {
    const Vec d3 = make_vec({0.6, -0.8, 0.0});
    const Vec p = cone_project(d3, AffineConeSpec::top_k(1));
    CHECK(p[0] == 0.0);
    CHECK(p[1] == doctest::Approx(-1.0));
    CHECK(p[2] == 0.0);
  }

  SUBCASE("projection is idempotent") {
    for (const AffineConeSpec& cone :
         {AffineConeSpec::subset({0}), AffineConeSpec::sign_constrained({1, -1}),
          AffineConeSpec::top_k(1)}) {
      const Vec p = cone_project(d, cone);
      const Vec p2 = cone_project(p, cone);
      CHECK((p - p2).norm() <= 1e-14);
    }
  }

  SUBCASE("empty projections throw") {
    CHECK_THROWS_AS(cone_project(d, AffineConeSpec::subset({})), EmptyProjectionError);
    CHECK_THROWS_AS(cone_project(make_vec({0.0, -0.8}), AffineConeSpec::sign_constrained({1, 1})),
                    EmptyProjectionError);
  }
}

TEST_CASE("cone_project maximizes cosine over sampled admissible directions") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 4;
    const Vec d = oracles::random_vec(rng, m).normalized();
    std::vector<int> signs(m);
    std::uniform_int_distribution<int> sd(-1, 1);
    for (int i = 0; i < m; ++i) signs[i] = sd(rng);
    const AffineConeSpec cone = AffineConeSpec::sign_constrained(signs);
    Vec p;
    try {
      p = cone_project(d, cone);
    } catch (const EmptyProjectionError&) {
      continue;
    }
    const double best = p.dot(d);
    for (int s = 0; s < 500; ++s) {
      Vec cand = oracles::random_vec(rng, m);
      for (int i = 0; i < m; ++i) {
        if (signs[i] > 0 && cand[i] < 0) cand[i] = -cand[i];
        if (signs[i] < 0 && cand[i] > 0) cand[i] = -cand[i];
      }
      if (cand.norm() < 1e-12) continue;
      cand.normalize();
      CHECK(cand.dot(d) <= best + 1e-9);
    }
  }
}

TEST_CASE("top-k selection uses the sensitivity vector when provided") {
  const Vec d = make_vec({0.5, 0.5, 0.5});
  const Vec sens = make_vec({0.1, 3.0, 0.2});
  const Vec p = cone_project(d, AffineConeSpec::top_k(1), &sens);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == 0.0);
}
