#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "evotree/errors.hpp"
#include "evotree/finite.hpp"

using namespace evotree;
using namespace evotree::finite;
using Catch::Approx;

namespace {

using Columns = std::vector<std::vector<double>>;
const Columns kIdentity2{{1, 0}, {0, 1}};
const Columns kSwap{{0, 1}, {1, 0}};

FiniteModel random_model(std::mt19937_64& g, std::size_t n, double lo = 0.0) {
  std::uniform_real_distribution<double> u(lo, 1.0), fu(0.05, 3.0);
  std::vector<double> f(n);
  for (auto& v : f) v = fu(g);
  Columns cols(n, std::vector<double>(n));
  for (auto& c : cols) {
    double s = 0;
    for (auto& v : c) s += (v = u(g));
    for (auto& v : c) v /= s;
  }
  return FiniteModel(f, cols);
}

PopulationState random_state(std::mt19937_64& g, std::size_t n) {
  std::uniform_real_distribution<double> u(0.001, 1.0);
  std::vector<double> x(n);
  double s = 0;
  for (auto& v : x) s += (v = u(g));
  for (auto& v : x) v /= s;
  return PopulationState(x);
}

}  // namespace

TEST_CASE("model validation") {
  SECTION("column sum 0.9 names the column") {
    try {
      FiniteModel m({1, 2}, {{1, 0}, {0.5, 0.4}});
      FAIL("accepted a bad column");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidModel);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("column 1"));
    }
  }
  CHECK_THROWS_AS(FiniteModel({-1, 2}, kIdentity2), Error);
  CHECK_THROWS_AS(FiniteModel({1, 2}, {{1.5, -0.5}, {0, 1}}), Error);
  CHECK_THROWS_AS(FiniteModel({1, 2}, {{1, 0}}), Error);
  CHECK_THROWS_AS(FiniteModel({}, {}), Error);
  CHECK_THROWS_AS(PopulationState({0.5, 0.6}), Error);
  CHECK_NOTHROW(FiniteModel({0, 0}, kIdentity2));  // zero fitness is allowed
}

TEST_CASE("json round trip") {
  const FiniteModel m({1, 2}, {{0.9, 0.1}, {0.3, 0.7}});
  const auto back = FiniteModel::from_json(m.to_json());
  CHECK(back.mutation(1, 0) == 0.1);
  CHECK(back.mutation(0, 1) == 0.3);
  CHECK_THROWS_AS(FiniteModel::from_json({{"fitness", {1}}}), Error);
  CHECK_THROWS_AS(FiniteModel::load("/nonexistent/model.json"), Error);
}

TEST_CASE("step_finite examples") {
  const FiniteModel sel({1, 2}, kIdentity2);
  const auto x = step(sel, PopulationState({0.5, 0.5}));
  CHECK(x[0] == Approx(1.0 / 3).epsilon(1e-15));
  CHECK(x[1] == Approx(2.0 / 3).epsilon(1e-15));

  const FiniteModel flat({2.5, 2.5, 2.5}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const PopulationState y({0.2, 0.3, 0.5});
  const auto y1 = step(flat, y);
  for (std::size_t i = 0; i < 3; ++i) CHECK(y1[i] == Approx(y[i]).epsilon(1e-15));

  // Q F x = swap * (0.5, 1.0) = (1.0, 0.5), normalized (2/3, 1/3).
  const FiniteModel sw({1, 2}, kSwap);
  const auto z = step(sw, PopulationState({0.5, 0.5}));
  CHECK(z[0] == Approx(2.0 / 3).epsilon(1e-15));
  CHECK(z[1] == Approx(1.0 / 3).epsilon(1e-15));

  const FiniteModel dead({0, 0}, kIdentity2);
  CHECK_THROWS_AS(step(dead, PopulationState({0.5, 0.5})), Error);
}

TEST_CASE("mean_fitness_finite examples") {
  CHECK(mean_fitness(FiniteModel({1, 2}, kIdentity2), PopulationState({0.5, 0.5})) == 1.5);
  CHECK(mean_fitness(FiniteModel({0, 0}, kIdentity2), PopulationState({0.3, 0.7})) == 0.0);
  const FiniteModel m3({1, 2, 4}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(mean_fitness(m3, PopulationState({0.25, 0.5, 0.25})) == 2.25);
}

TEST_CASE("price_decomposition examples") {
  const FiniteModel sel({1, 2}, kIdentity2);
  auto p = price_decomposition(sel, PopulationState({0.5, 0.5}), std::vector<double>{1, 2});
  CHECK(p.selection == Approx(1.0 / 6).epsilon(1e-14));
  CHECK(p.mutation == Approx(0.0).margin(1e-15));
  CHECK(p.total == Approx(1.0 / 6).epsilon(1e-14));

  p = price_decomposition(sel, PopulationState({0.3, 0.7}), std::vector<double>{4, 4});
  CHECK(p.selection == Approx(0.0).margin(1e-15));
  CHECK(p.mutation == Approx(0.0).margin(1e-15));
  CHECK(p.total == Approx(0.0).margin(1e-15));

  // z-bar goes 1.5 -> 4/3 under the swap.
  const FiniteModel sw({1, 2}, kSwap);
  p = price_decomposition(sw, PopulationState({0.5, 0.5}), std::vector<double>{1, 2});
  CHECK(p.selection == Approx(1.0 / 6).epsilon(1e-14));
  CHECK(p.mutation == Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(p.total == Approx(-1.0 / 6).epsilon(1e-14));
}

TEST_CASE("Price identity holds on random inputs") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> zu(-3, 3);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + i % 8;
    const auto m = random_model(g, n);
    std::vector<double> z(n);
    for (auto& v : z) v = zu(g);
    const auto p = price_decomposition(m, random_state(g, n), z);
    CHECK(std::fabs(p.total - p.selection - p.mutation) <= 1e-10);
  }
}

TEST_CASE("fisher_delta examples and properties") {
  auto d = fisher_delta(FiniteModel({1, 2}, kIdentity2), PopulationState({0.5, 0.5}));
  CHECK(d.delta == Approx(0.25 / 1.5).epsilon(1e-14));
  CHECK(d.var_over_mean == Approx(0.25 / 1.5).epsilon(1e-14));

  d = fisher_delta(FiniteModel({3, 3}, kIdentity2), PopulationState({0.1, 0.9}));
  CHECK(d.delta == Approx(0.0).margin(1e-15));

  const FiniteModel m3({1, 2, 3}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  d = fisher_delta(m3, PopulationState({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  CHECK(d.delta == Approx(1.0 / 3).epsilon(1e-14));
  CHECK(d.var_over_mean == Approx(1.0 / 3).epsilon(1e-14));

  CHECK_THROWS_AS(fisher_delta(FiniteModel({1, 2}, kSwap), PopulationState({0.5, 0.5})), Error);

  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> fu(0.01, 5);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + i % 8;
    std::vector<double> f(n);
    for (auto& v : f) v = fu(g);
    Columns id(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) id[k][k] = 1;
    const auto r = fisher_delta(FiniteModel(f, id), random_state(g, n));
    CHECK(r.delta >= -1e-14);
    CHECK(std::fabs(r.delta - r.var_over_mean) <= 1e-12);
  }
}

TEST_CASE("perron_eigenpair examples") {
  // A = Q F = ((2, 1), (1, 2)): eigenvalue 3, eigenvector (1, 1).
  const FiniteModel sym({3, 3}, {{2.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3}});
  auto p = perron_eigenpair(sym);
  REQUIRE(p.converged);
  CHECK(p.eigenvalue == Approx(3.0).epsilon(1e-12));
  CHECK(p.right_vector[0] == Approx(0.5).epsilon(1e-12));

  p = perron_eigenpair(FiniteModel({1, 2}, kIdentity2));
  REQUIRE(p.converged);
  CHECK(p.eigenvalue == Approx(2.0).epsilon(1e-12));
  CHECK(p.right_vector[0] == Approx(0.0).margin(1e-11));
  CHECK(p.right_vector[1] == Approx(1.0).epsilon(1e-11));

  // A = ((0, 2), (1, 0)) has eigenvalues +-sqrt(2): no spectral gap.
  p = perron_eigenpair(FiniteModel({1, 2}, kSwap), {1e-12, 2000});
  CHECK_FALSE(p.converged);
}

TEST_CASE("perron residuals on random positive systems") {
  std::mt19937_64 g(13);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_model(g, 10, 0.05);
    const auto p = perron_eigenpair(m);
    REQUIRE(p.converged);
    CHECK(eigen_residual(m.growth_rows(), p.right_vector, p.eigenvalue) <= 1e-10);
    CHECK(eigen_residual(m.growth_transpose_rows(), p.left_vector, p.eigenvalue) <= 1e-10 * 10);
    double wv = 0, sum = 0;
    for (std::size_t k = 0; k < 10; ++k) {
      wv += p.left_vector[k] * p.right_vector[k];
      sum += p.right_vector[k];
      CHECK(p.right_vector[k] >= 0.0);
      CHECK(p.left_vector[k] >= 0.0);
    }
    CHECK(wv == Approx(1.0).epsilon(1e-12));
    CHECK(sum == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("symmetrized_operator") {
  auto b = symmetrized_operator(FiniteModel({1, 4}, kIdentity2));
  CHECK(b == std::vector<double>{1, 0, 0, 4});

  const Columns q{{0.7, 0.3}, {0.3, 0.7}};
  b = symmetrized_operator(FiniteModel({1, 1}, q));
  CHECK(b == std::vector<double>{0.7, 0.3, 0.3, 0.7});

  const FiniteModel m({1, 4}, {{0.5, 0.5}, {0.5, 0.5}});
  b = symmetrized_operator(m);
  CHECK(b[0] == Approx(0.5));
  CHECK(b[1] == Approx(1.0));
  CHECK(b[2] == Approx(1.0));
  CHECK(b[3] == Approx(2.0));
  const auto pb = power_iteration(b, {}, 2, {});
  const auto pa = perron_eigenpair(m);
  CHECK(pb.eigenvalue == Approx(2.5).epsilon(1e-12));
  CHECK(pa.eigenvalue == Approx(2.5).epsilon(1e-12));

  CHECK_THROWS_AS(symmetrized_operator(FiniteModel({1, 2}, {{0.9, 0.1}, {0.3, 0.7}})), Error);
}

TEST_CASE("symmetrized spectrum matches A for random symmetric Q") {
  std::mt19937_64 g(14);
  std::uniform_real_distribution<double> u(0.0, 1.0), fu(0.1, 3.0);
  for (int i = 0; i < 40; ++i) {
    // Symmetric doubly-stochastic Q as a convex mix of symmetric permutations.
    const std::size_t n = 6;
    Columns q(n, std::vector<double>(n, 0.0));
    double w_total = 0;
    std::vector<double> weights(n);
    for (auto& w : weights) w_total += (w = u(g));
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t k = 0; k < n; ++k) q[k][(n + s - k) % n] += weights[s] / w_total;
    }
    std::vector<double> f(n);
    for (auto& v : f) v = fu(g);
    const FiniteModel m(f, q);
    const auto pa = perron_eigenpair(m);
    const auto pb = power_iteration(symmetrized_operator(m), {}, n, {});
    if (pa.converged && pb.converged) CHECK(std::fabs(pa.eigenvalue - pb.eigenvalue) <= 1e-11 * pa.eigenvalue);
  }
}

TEST_CASE("evolve_finite") {
  const FiniteModel sel({1, 2}, kIdentity2);
  CHECK(evolve(sel, PopulationState({0.5, 0.5}), 0).size() == 1);

  const auto traj = evolve(sel, PopulationState({0.5, 0.5}), 50);
  REQUIRE(traj.size() == 51);
  CHECK(traj.back().state[0] <= 1e-10);
  CHECK(traj.back().state[1] >= 1 - 1e-10);

  std::mt19937_64 g(15);
  for (int i = 0; i < 10; ++i) {
    const auto m = random_model(g, 10, 0.1);
    const auto p = perron_eigenpair(m);
    REQUIRE(p.converged);
    const auto t = evolve(m, PopulationState::uniform(10), 500);
    for (std::size_t k = 0; k < 10; ++k) CHECK(std::fabs(t.back().state[k] - p.right_vector[k]) <= 1e-8);
  }

  // A zero-fitness type feeding nothing: the run stops with a flagged record.
  const FiniteModel dead({0, 0}, kIdentity2);
  const auto d = evolve(dead, PopulationState({0.5, 0.5}), 5);
  REQUIRE(d.size() == 1);
  CHECK(d.back().extinct);
}
