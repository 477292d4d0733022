#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "evotree/analysis.hpp"
#include "evotree/errors.hpp"
#include "evotree/registry.hpp"
#include "evotree/tree.hpp"
#include "evotree/zoo.hpp"

using namespace evotree;
using namespace evotree::analysis;
using namespace evotree::tree;
using Catch::Approx;

namespace {

double constant_one(std::uint64_t) { return 1.0; }

ExponentEstimate est(double lower, double upper) {
  ExponentEstimate e;
  e.lower = lower;
  e.upper = upper;
  e.window = 10;
  e.horizon = 100;
  return e;
}

std::vector<zoo::ZooModel> inner_models() {
  return {
      zoo::single_ray(constant_one),
      zoo::two_ray(constant_one, [](std::uint64_t t) { return 1.0 / (t + 1.0); }),
      zoo::oscillating_block_ray(1.0, 2.0, zoo::geometric_blocks(2)),
      zoo::binary_dyadic(),
      zoo::burst_spine(0.5, 0.5),
      zoo::nonattained_spine(0.5),
      zoo::unbounded_spine(0.5, 0.1, [](std::uint64_t t) { return std::pow(4.0, double(t)); }),
      zoo::tensor_product(zoo::binary_dyadic(), zoo::burst_spine(0.5, 0.5)),
  };
}

}  // namespace

TEST_CASE("eta_preservation_check") {
  CHECK(eta_preservation_check(*zoo::burst_spine(0.5, 0.5), 12, 0.5).holds);

  const auto decreasing = zoo::two_ray(constant_one, [](std::uint64_t t) { return 1.0 / (t + 1.0); });
  const auto r = eta_preservation_check(*decreasing, 6, 0.5);
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness.has_value());
  CHECK(decreasing->labels(r.witness->state).has(kTagRayB));
  CHECK(r.witness_mass == 0.0);

  for (const auto& inner : inner_models()) {
    CAPTURE(inner.name);
    for (double eta : {0.1, 0.25, 0.3, 0.5}) {
      const auto res = eta_preservation_check(*zoo::lock(inner, eta), 8, eta, 200000);
      CHECK(res.holds);
      CHECK(res.visited > 0);
    }
  }

  const auto capped = eta_preservation_check(*zoo::binary_dyadic(), 20, 0.5, 1000);
  CHECK_FALSE(capped.complete);
  CHECK(capped.visited <= 1000);
}

TEST_CASE("classify_partition examples") {
  CHECK(classify_partition(est(2, 2), est(1, 1), 0.01).verdict == Verdict::TakesOver);
  CHECK(classify_partition(est(1.5, 1.5), est(1.5, 1.5), 0.01).verdict == Verdict::Inconclusive);
  CHECK(classify_partition(est(1.0, 1.8), est(1.0, 1.2), 0.01).verdict == Verdict::Survives);
  CHECK(classify_partition(est(1, 1), est(2, 2), 0.01).verdict == Verdict::DiesOut);
  CHECK(verdict_name(Verdict::TakesOver) == "takes_over");
  CHECK(verdict_name(Verdict::DiesOut) == "dies_out");
}

TEST_CASE("classify_partition under swapping S and T") {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> u(0.5, 2.5);
  for (int i = 0; i < 5000; ++i) {
    double a = u(g), b = u(g), c = u(g), d = u(g);
    const auto s = est(std::min(a, b), std::max(a, b));
    const auto t = est(std::min(c, d), std::max(c, d));
    const auto fwd = classify_partition(s, t).verdict;
    const auto back = classify_partition(t, s).verdict;
    if (fwd == Verdict::TakesOver) CHECK(back == Verdict::DiesOut);
    if (back == Verdict::TakesOver) CHECK(fwd == Verdict::DiesOut);
    // The survival branch is one-sided, so an inconclusive pair may come back
    // as survives once S and T trade places.
    if (fwd == Verdict::Inconclusive) CHECK((back == Verdict::Inconclusive || back == Verdict::Survives));
  }
}

TEST_CASE("concentration_mass") {
  const auto ray = zoo::single_ray([](std::uint64_t) { return 1.4; });
  const auto f = run_tree(*ray, 5, {}, {}).final_frontier;
  CHECK(concentration_mass(f, 1.4, 1e-9) == 1.0);

  const auto spine = zoo::nonattained_spine(0.5);
  const auto late = run_tree(*spine, 3000, {}, {}).final_frontier;
  CHECK(concentration_mass(late, 1.0, 0.1) > 0.99);

  // Monotone in epsilon.
  const auto bin = run_tree(*zoo::binary_dyadic(), 12, {}, {}).final_frontier;
  double prev = 0.0;
  for (double e = 0.01; e < 2.0; e *= 1.5) {
    const double m = concentration_mass(bin, 2.0, e);
    CHECK(m >= prev);
    prev = m;
  }

  const auto unb = zoo::unbounded_spine(0.5, 0.1, [](std::uint64_t t) { return std::pow(4.0, double(t)); });
  auto fr = root_frontier(*unb);
  for (int t = 1; t <= 40; ++t) {
    fr = advance(*unb, std::move(fr), {});
    double fmax = 0.0;
    for (double v : fr.fitness) fmax = std::max(fmax, v);
    CHECK(concentration_mass(fr, fmax, 1e-6 * fmax) < 0.9);
  }
}

TEST_CASE("expected_utility") {
  const auto z = zoo::burst_spine(0.5, 0.5);
  const auto tr = run_tree(*z, 7, {}, {});
  const auto& f = tr.final_frontier;

  const auto id = expected_utility(f, identity_utility());
  CHECK(id.value == tr.records.back().mean_fitness);
  CHECK(expected_utility(f, constant_utility(-2.5)).value == Approx(-2.5).epsilon(1e-14));

  const auto lg = expected_utility(f, log_utility());
  CHECK(lg.minus_infinity);
  CHECK(std::isinf(lg.value));
  CHECK(lg.value < 0);
  CHECK(lg.catastrophic_share > 0.0);
  CHECK(lg.catastrophic_share == Approx(trait_share(f, *z, registry::make_trait("zero_fitness"))).epsilon(1e-14));

  const auto sq = utility_from_name("square");
  CHECK(sq.conditional_mean(3.0) == 9.0);
  CHECK(utility_from_name("constant:0.5").conditional_mean(10.0) == 0.5);
  CHECK_THROWS_AS(utility_from_name("cubic"), Error);

  auto bounded = constant_utility(1.0);
  CHECK(bounded.bounded);
  CHECK(spot_check_bound(bounded, {0.0, 1.0, 5.0}));
  auto lying = identity_utility();
  lying.bounded = true;
  lying.bound = 1.0;
  CHECK_FALSE(spot_check_bound(lying, {0.5, 1.5}));
}

TEST_CASE("coordinate_means") {
  const auto cd = zoo::tensor_product(zoo::single_ray(constant_one), zoo::single_ray([](std::uint64_t) { return 2.0; }));
  auto f = root_frontier(*cd);
  for (int t = 0; t < 10; ++t) {
    const auto m = coordinate_means(f, *cd);
    CHECK(m.mean_c == 1.0);
    CHECK(m.mean_d == 2.0);
    f = advance(*cd, std::move(f), {});
  }

  for (const auto& model : {zoo::tensor_product(zoo::binary_dyadic(), zoo::burst_spine(0.5, 0.5)),
                            zoo::tensor_product(zoo::lock(zoo::binary_dyadic(), 0.2), zoo::binary_dyadic())}) {
    auto fr = root_frontier(*model);
    for (int t = 0; t < 9; ++t) {
      const auto m = coordinate_means(fr, *model);
      CHECK(std::fabs(m.mean_c + m.mean_d - mean_fitness(fr)) <= 1e-10);
      fr = advance(*model, std::move(fr), {});
    }
  }

  const auto ln = zoo::tensor_product(zoo::lock(zoo::nonattained_spine(0.5), 0.5),
                                      zoo::lock(zoo::nonattained_spine(0.5), 0.5));
  // Both coordinates climb toward their supremum 1; a coarse prune cuts off
  // the deep spine nodes that carry the climb.
  std::vector<CoordinateMeans> checkpoints;
  run_tree(*ln, 800, {1e-16}, {}, [&](const StepRecord& r, const Frontier& fr) {
    if (r.time % 200 == 0) checkpoints.push_back(coordinate_means(fr, *ln));
  });
  REQUIRE(checkpoints.size() == 4);
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    CHECK(checkpoints[i].mean_c > checkpoints[i - 1].mean_c);
    CHECK(checkpoints[i].mean_d > checkpoints[i - 1].mean_d);
  }
  CHECK(checkpoints.back().mean_c > 0.93);
  CHECK(checkpoints.back().mean_d > 0.93);
  CHECK(checkpoints.back().mean_c + checkpoints.back().mean_d < 2.0);

  const auto plain = zoo::binary_dyadic();
  try {
    coordinate_means(root_frontier(*plain), *plain);
    FAIL("no labels, no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingCoordinateLabels);
  }
}

TEST_CASE("geometric_mean_floor_check") {
  const auto burst = run_tree(*zoo::burst_spine(0.5, 0.5), 200, {}, {});
  const auto fc = geometric_mean_floor_check(burst, 0.5, 1.0, 0.25);
  CHECK(fc.passes);
  CHECK(fc.floor_estimate >= 0.5 - 1e-3);

  const auto locked = run_tree(*zoo::single_ray([](std::uint64_t) { return 1.7; }), 50, {}, {});
  const auto lc = geometric_mean_floor_check(locked, 0.3, 1.7, 0.5);
  CHECK(lc.floor_estimate == Approx(1.7).epsilon(1e-14));
  CHECK(lc.passes);

  // No preservation: the decreasing ray drags the floor under eta f*.
  const auto dec = run_tree(*zoo::single_ray([](std::uint64_t t) { return 1.0 / (t + 1.0); }), 100, {}, {});
  CHECK_FALSE(geometric_mean_floor_check(dec, 0.5, 1.0, 0.5).passes);
}

TEST_CASE("min_trailing_share") {
  const auto z = zoo::lock(zoo::binary_dyadic(), 0.25);
  const auto tr = run_tree(*z, 14, {}, {registry::make_trait("locked")});
  CHECK(min_trailing_share(tr, 0, 0.5) >= 0.25 - 1e-12);
  CHECK(min_trailing_share(tr, 0, 0.999) == Approx(0.25).epsilon(1e-12));
}
