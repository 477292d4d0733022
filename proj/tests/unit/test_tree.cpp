#include <cmath>
#include <cstdlib>
#include <numeric>

#include "catch_amalgamated.hpp"
#include "evotree/errors.hpp"
#include "evotree/registry.hpp"
#include "evotree/tree.hpp"
#include "evotree/zoo.hpp"

using namespace evotree;
using namespace evotree::tree;
using Catch::Approx;

namespace {

TraitPredicate tag_trait(const std::string& name) { return registry::make_trait(name); }

double share_sum(const Frontier& f) { return std::accumulate(f.shares.begin(), f.shares.end(), 0.0); }

std::vector<zoo::ZooModel> small_zoo() {
  return {
      zoo::single_ray([](std::uint64_t) { return 1.0; }),
      zoo::single_ray([](std::uint64_t t) { return 1.0 / (t + 1.0); }),
      zoo::two_ray([](std::uint64_t) { return 1.0; }, [](std::uint64_t t) { return t / (t + 1.0); }),
      zoo::oscillating_block_ray(1.0, 2.0, zoo::geometric_blocks(4)),
      zoo::binary_dyadic(),
      zoo::burst_spine(0.5, 0.5),
      zoo::lock(zoo::binary_dyadic(), 0.3),
      zoo::nonattained_spine(0.5),
      zoo::unbounded_spine(0.5, 0.1, [](std::uint64_t t) { return std::pow(4.0, double(t)); }),
      zoo::tensor_product(zoo::binary_dyadic(), zoo::burst_spine(0.5, 0.5)),
  };
}

}  // namespace

TEST_CASE("root_frontier") {
  const auto m = zoo::binary_dyadic();
  const auto f = root_frontier(*m);
  REQUIRE(f.size() == 1);
  CHECK(f.paths[0].is_root());
  CHECK(f.shares[0] == 1.0);
  CHECK(f.log_total_mass == 0.0);
  CHECK(f.depth == 0);
  CHECK(f.truncated_share_bound == 0.0);
}

TEST_CASE("advance examples") {
  SECTION("constant ray stays put") {
    const auto m = zoo::single_ray([](std::uint64_t) { return 1.0; });
    auto f = root_frontier(*m);
    for (int i = 0; i < 10; ++i) f = advance(*m, std::move(f), {});
    CHECK(f.size() == 1);
    CHECK(f.shares[0] == 1.0);
    CHECK(f.log_total_mass == 0.0);
    CHECK(f.depth == 10);
  }
  SECTION("binary dyadic root step") {
    const auto m = zoo::binary_dyadic();
    const auto f0 = root_frontier(*m);
    CHECK(mean_fitness(f0) == 1.0);
    StepRecord rec;
    const auto f1 = advance(*m, f0, {}, &rec);
    REQUIRE(f1.size() == 2);
    CHECK(f1.paths[0] == Path::parse("0"));
    CHECK(f1.fitness[0] == 0.5);
    CHECK(f1.fitness[1] == 1.5);
    CHECK(f1.shares[0] == 0.5);
    CHECK(f1.shares[1] == 0.5);
    CHECK(rec.time == 1);
    CHECK(rec.mean_fitness == 1.0);  // <f(1)>
    CHECK(rec.log_total_mass == 0.0);
  }
  SECTION("burst spine step from the spine") {
    const auto m = zoo::burst_spine(0.5, 0.5);
    const auto f0 = root_frontier(*m);
    CHECK(mean_fitness(f0) == 1.0);
    const auto f1 = advance(*m, f0, {});
    REQUIRE(f1.size() == 2);
    CHECK(f1.shares[0] == 0.5);
    CHECK(f1.shares[1] == 0.5);
    CHECK(tag_trait("spine").test({f1.paths[0], f1.states[0], f1.fitness[0], m->labels(f1.states[0])}));
  }
  SECTION("bad threshold") {
    const auto m = zoo::binary_dyadic();
    CHECK_THROWS_AS(advance(*m, root_frontier(*m), {1.0}), Error);
    CHECK_THROWS_AS(advance(*m, root_frontier(*m), {-0.1}), Error);
  }
}

TEST_CASE("run_tree") {
  const auto bin = zoo::binary_dyadic();
  const auto none = run_tree(*bin, 0, {}, {});
  CHECK(none.records.empty());
  CHECK(none.final_frontier.size() == 1);
  CHECK(none.final_frontier.depth == 0);

  SECTION("harmonic ray: fitness need not increase") {
    const auto m = zoo::single_ray([](std::uint64_t t) { return 1.0 / (t + 1.0); });
    const auto tr = run_tree(*m, 200, {}, {});
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
      CHECK(tr.records[i].running_geometric_mean < tr.records[i - 1].running_geometric_mean);
    }
    // Z(t) = 1/t!, so Z^{1/t} ~ e/t.
    CHECK(tr.records.back().running_geometric_mean < 0.02);
  }
  SECTION("locked share never drops below eta") {
    const auto m = zoo::lock(zoo::binary_dyadic(), 0.25);
    const auto tr = run_tree(*m, 12, {}, {tag_trait("locked")});
    CHECK(tr.records.front().trait_shares[0] == Approx(0.25).epsilon(1e-14));
    for (const auto& r : tr.records) CHECK(r.trait_shares[0] >= 0.25 - 1e-12);
  }
  SECTION("observer sees every step") {
    std::size_t calls = 0;
    run_tree(*bin, 5, {}, {}, [&](const StepRecord& r, const Frontier& f) {
      ++calls;
      CHECK(r.time == f.depth);
    });
    CHECK(calls == 5);
  }
}

TEST_CASE("trait_share") {
  const auto m = zoo::lock(zoo::binary_dyadic(), 0.25);
  const auto f = advance(*m, root_frontier(*m), {});
  CHECK(trait_share(f, *m, tag_trait("all")) == Approx(1.0).epsilon(1e-15));
  CHECK(trait_share(f, *m, tag_trait("none")) == 0.0);
  CHECK(trait_share(f, *m, tag_trait("locked")) == Approx(0.25).epsilon(1e-15));
  CHECK(trait_share(f, *m, tag_trait("subtree:1")) == Approx(0.375).epsilon(1e-15));
}

TEST_CASE("engine properties across the zoo") {
  for (const auto& z : small_zoo()) {
    CAPTURE(z.name);
    auto f = root_frontier(*z);
    double prev_log = 0.0;
    for (std::uint64_t t = 1; t <= 14; ++t) {
      const double mf = mean_fitness(f);
      f = advance(*z, std::move(f), {});
      REQUIRE_FALSE(f.extinct);
      CHECK(std::fabs((f.log_total_mass - prev_log) - std::log(mf)) <= 1e-10);
      CHECK(std::fabs(share_sum(f) - 1.0) <= 1e-10);
      CHECK(f.truncated_share_bound == 0.0);
      for (const auto& p : f.paths) CHECK(p.depth() == t);
      prev_log = f.log_total_mass;
    }
  }
}

TEST_CASE("pruning keeps the recorded recursion and grows the bound") {
  const auto m = zoo::binary_dyadic();
  const auto tr = run_tree(*m, 20, {1e-4}, {});
  double prev_bound = 0.0;
  double prev_log = 0.0;
  double prev_mean = 1.0;
  for (const auto& r : tr.records) {
    CHECK(r.truncated_share_bound >= prev_bound);
    CHECK(std::fabs(r.log_total_mass - prev_log - std::log(prev_mean)) <= 1e-10);
    prev_bound = r.truncated_share_bound;
    prev_log = r.log_total_mass;
    prev_mean = r.mean_fitness;
  }
  CHECK(prev_bound > 0.0);
  CHECK(tr.final_frontier.size() < (1u << 20));
  CHECK(std::fabs(share_sum(tr.final_frontier) - 1.0) <= 1e-10);
}

TEST_CASE("extinction") {
  // Root fitness 1, every later node 0.
  const auto m = zoo::single_ray([](std::uint64_t t) { return t == 0 ? 1.0 : 0.0; });
  const auto tr = run_tree(*m, 5, {}, {});
  REQUIRE(tr.extinct_at.has_value());
  CHECK(*tr.extinct_at == 2);
  CHECK(tr.final_frontier.extinct);
  CHECK(std::isinf(tr.final_frontier.log_total_mass));

  const auto sizes = lineage_sizes(*m, NodeRef{Path(), m->root()}, 4, {});
  REQUIRE(sizes.size() == 5);
  CHECK(sizes[1] == 0.0);
  for (std::size_t s = 2; s < sizes.size(); ++s) CHECK(std::isinf(sizes[s]));
}

TEST_CASE("frontier cap") {
  const auto m = zoo::binary_dyadic();
  AdvanceOptions opts;
  opts.max_frontier = 100;
  try {
    run_tree(*m, 10, opts, {});
    FAIL("no explosion reported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FrontierExplosion);
  }
  ::setenv("EVOTREE_MAX_FRONTIER", "1234", 1);
  CHECK(max_frontier_from_env() == 1234);
  ::unsetenv("EVOTREE_MAX_FRONTIER");
  CHECK(max_frontier_from_env() == 5'000'000);
}

TEST_CASE("lineage_sizes") {
  SECTION("locked ray grows as f^s") {
    const auto m = zoo::lock(zoo::single_ray([](std::uint64_t) { return 1.7; }), 0.4);
    const Path head = Path::parse("1");  // the locked child comes after the ray child
    const NodeRef origin{head, m->resolve(head)};
    REQUIRE(m->labels(origin.state).has(kTagLocked));
    const auto sizes = lineage_sizes(*m, origin, 50, {});
    CHECK(sizes[0] == 0.0);
    for (std::size_t s = 0; s < sizes.size(); ++s) CHECK(sizes[s] == Approx(s * std::log(1.7)).margin(1e-12));
  }
  SECTION("binary node 0 tends to exponent 1") {
    const auto m = zoo::binary_dyadic();
    const Path node = Path::parse("0");
    const auto sizes = lineage_sizes(*m, {node, m->resolve(node)}, 18, {});
    // Z(s)^{1/s} climbs toward f + 2^{-1} = 1 from below.
    for (std::size_t s = 2; s < sizes.size(); ++s) {
      CHECK(sizes[s] / s >= sizes[s - 1] / (s - 1) - 1e-15);
      CHECK(sizes[s] / s <= 1e-12);
    }
    const auto est = exponent_estimate(sizes, 4);
    CHECK(est.upper <= 1.0 + 1e-12);
    CHECK(est.lower > 0.75);
    CHECK(zoo::binary_closed_form_exponent(node) == 1.0);
  }
  SECTION("lineage mass recursion") {
    const auto m = zoo::burst_spine(0.5, 0.5);
    const Path node = Path::parse("0.1");
    const NodeRef origin{node, m->resolve(node)};
    const auto sizes = lineage_sizes(*m, origin, 12, {});
    auto f = origin_frontier(*m, origin);
    for (std::size_t s = 0; s + 1 < sizes.size(); ++s) {
      CHECK(std::fabs(sizes[s + 1] - sizes[s] - std::log(mean_fitness(f))) <= 1e-10);
      f = advance(*m, std::move(f), {});
    }
  }
  SECTION("invalid origin") { CHECK_THROWS_AS(zoo::binary_dyadic()->resolve(Path::parse("2")), Error); }
}

TEST_CASE("monotonicity inequality Z_n(t+k) >= q Z_m(t)") {
  const auto models = small_zoo();
  for (const auto& z : models) {
    CAPTURE(z.name);
    const NodeRef root{Path(), z->root()};
    const auto zn = lineage_sizes(*z, root, 12, {});
    std::size_t checked = 0;
    visit_reachable(*z, 4, 64, [&](const NodeRef& m, double) {
      const double q = path_transition_mass(*z, root, m.path);
      if (!(q > 0.0)) return true;
      const auto k = m.depth();
      const auto zm = lineage_sizes(*z, m, 12 - k, {});
      for (std::size_t t = 0; t < zm.size(); ++t) {
        if (std::isinf(zm[t])) break;
        CHECK(zn[t + k] >= std::log(q) + zm[t] - 1e-9);
      }
      ++checked;
      return true;
    });
    CHECK(checked > 0);
  }
}

TEST_CASE("path_transition_mass") {
  const auto m = zoo::binary_dyadic();
  const NodeRef root{Path(), m->root()};
  // 1 * 1/2 then f("1") = 1.5 * 1/2
  CHECK(path_transition_mass(*m, root, Path::parse("10")) == Approx(0.375).epsilon(1e-15));
  const Path one = Path::parse("1");
  CHECK(path_transition_mass(*m, {one, m->resolve(one)}, Path::parse("0")) == 0.0);
}

TEST_CASE("exponent_estimate") {
  std::vector<double> sizes(21);
  for (std::size_t t = 0; t < sizes.size(); ++t) sizes[t] = t * std::log(2.0);
  for (std::size_t w : {1u, 5u, 20u}) {
    const auto e = exponent_estimate(sizes, w);
    CHECK(e.lower == Approx(2.0).epsilon(1e-14));
    CHECK(e.upper == Approx(2.0).epsilon(1e-14));
    CHECK(e.horizon == 20);
    CHECK(e.window == w);
  }
  try {
    exponent_estimate(sizes, 21);
    FAIL("window as long as the sequence was accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooShort);
  }
}

TEST_CASE("binary dyadic root exponent against exhaustive enumeration") {
  const auto m = zoo::binary_dyadic();
  const auto tr = run_tree(*m, 16, {}, {});
  // Z(16) by brute force over every bit string: mass of a leaf is the product
  // of 1/2 times the fitness of each ancestor.
  long double z = 0;
  for (std::uint32_t bits = 0; bits < (1u << 16); ++bits) {
    long double mass = 1, f = 1, w = 0.5;
    for (int j = 0; j < 16; ++j) {
      mass *= f * 0.5L;
      f += ((bits >> (15 - j)) & 1u ? w : -w);
      w /= 2;
    }
    z += mass;
  }
  CHECK(tr.records.back().log_total_mass == Approx(double(std::log(z))).epsilon(1e-12));
  std::vector<double> sizes{0.0};
  for (const auto& r : tr.records) sizes.push_back(r.log_total_mass);
  const auto e = exponent_estimate(sizes, 4);
  CHECK(e.lower <= 2.0);
  CHECK(e.upper <= 2.0);
}

TEST_CASE("particle_oracle") {
  SECTION("rays agree exactly") {
    const auto m = zoo::single_ray([](std::uint64_t t) { return 1.0 + 0.1 * t; });
    const auto p = particle_oracle(*m, 7, 20, 3, {});
    REQUIRE(p.size() == 21);
    for (std::size_t t = 0; t < p.size(); ++t) CHECK(p[t].mean_fitness == Approx(1.0 + 0.1 * t).epsilon(1e-14));
  }
  SECTION("binary dyadic within 5/sqrt(N)") {
    const auto m = zoo::binary_dyadic();
    const auto p = particle_oracle(*m, 100000, 10, 42, {});
    const auto tr = run_tree(*m, 10, {}, {});
    CHECK(p[0].mean_fitness == 1.0);
    for (std::size_t t = 1; t <= 10; ++t) CHECK(std::fabs(p[t].mean_fitness - tr.records[t - 1].mean_fitness) <= 0.02);
  }
  SECTION("seeded runs repeat, different seeds differ") {
    const auto m = zoo::burst_spine(0.5, 0.5);
    const std::vector<TraitPredicate> traits{tag_trait("spine"), tag_trait("burst")};
    const auto a = particle_oracle(*m, 5000, 15, 9, traits);
    const auto b = particle_oracle(*m, 5000, 15, 9, traits);
    const auto c = particle_oracle(*m, 5000, 15, 10, traits);
    bool differ = false;
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].mean_fitness == b[t].mean_fitness);
      CHECK(a[t].trait_shares == b[t].trait_shares);
      differ = differ || a[t].mean_fitness != c[t].mean_fitness;
    }
    CHECK(differ);
  }
  SECTION("errors") {
    const auto m = zoo::single_ray([](std::uint64_t t) { return t == 0 ? 1.0 : 0.0; });
    CHECK_THROWS_AS(particle_oracle(*m, 0, 3, 1, {}), Error);
    try {
      particle_oracle(*m, 10, 3, 1, {});
      FAIL("no extinction");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Extinction);
    }
  }
}
