#include "evotree/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "evotree/analysis.hpp"
#include "evotree/errors.hpp"
#include "evotree/finite.hpp"
#include "evotree/gaussian.hpp"
#include "evotree/registry.hpp"
#include "evotree/tree.hpp"
#include "evotree/zoo.hpp"

namespace evotree::acceptance {

namespace {

using tree::Frontier;
using tree::TreeModel;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

tree::TraitPredicate tag_trait(tree::Tag tag, std::string name) {
  return {std::move(name), [tag](const tree::NodeInfo& n) { return n.labels.has(tag); }};
}

tree::TraitPredicate zero_fitness_trait() { return registry::make_trait("zero_fitness"); }

zoo::ZooModel constant_ray(double c) {
  return zoo::single_ray([c](std::uint64_t) { return c; }, "constant_ray", c);
}

zoo::ZooModel tiebreaker() {
  return zoo::two_ray([](std::uint64_t) { return 1.0; },
                      [](std::uint64_t t) {
                        const double x = static_cast<double>(t);
                        return x / (x + 1.0);
                      });
}

zoo::ZooModel unbounded_default() {
  return zoo::unbounded_spine(0.5, 0.1, [](std::uint64_t t) { return std::pow(4.0, static_cast<double>(t)); });
}

zoo::ZooModel deception_model() {
  const auto side = zoo::lock(zoo::nonattained_spine(0.5), 0.5);
  return zoo::tensor_product(side, side);
}

// Runs that more than one criterion looks at.
struct Shared {
  std::optional<tree::Trajectory> binary20;
  std::optional<tree::Trajectory> nonattained;
  struct UnboundedRun {
    tree::Trajectory traj;
    std::vector<double> zero_share;
    std::vector<bool> log_flagged;
  };
  std::optional<UnboundedRun> unbounded;

  const tree::Trajectory& binary_exact() {
    if (!binary20) binary20 = tree::run_tree(*zoo::binary_dyadic(), 20, {0.0, 5'000'000}, {});
    return *binary20;
  }
  const tree::Trajectory& nonattained_run() {
    if (!nonattained) nonattained = tree::run_tree(*zoo::nonattained_spine(0.5), 5000, {0.0, 5'000'000}, {});
    return *nonattained;
  }
  const UnboundedRun& unbounded_run() {
    if (!unbounded) {
      UnboundedRun u;
      const auto log_mu = analysis::log_utility();
      const auto zm = unbounded_default();
      u.traj = tree::run_tree(*zm, 100, {0.0, 5'000'000}, {zero_fitness_trait(), tag_trait(tree::kTagLocked, "locked")},
                              [&](const tree::StepRecord& rec, const Frontier& f) {
                                u.zero_share.push_back(rec.trait_shares[0]);
                                u.log_flagged.push_back(analysis::expected_utility(f, log_mu).minus_infinity);
                              });
      unbounded = std::move(u);
    }
    return *unbounded;
  }
};

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); }
};

std::vector<std::vector<double>> random_columns(Rng& rng, std::size_t n, double lo) {
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (auto& col : cols) {
    double s = 0.0;
    for (auto& v : col) s += (v = rng.uniform(lo, 1.0));
    for (auto& v : col) v /= s;
  }
  return cols;
}

finite::PopulationState random_state(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  double s = 0.0;
  for (auto& v : x) s += (v = rng.uniform(0.0, 1.0) + 1e-3);
  for (auto& v : x) v /= s;
  // Absorb rounding so the sum is within the state's 1e-12 check.
  return finite::PopulationState(std::move(x));
}

// ---- finite-selmut ---------------------------------------------------------

CriterionResult price_identity() {
  CriterionResult r{"1", "Price identity on 1000 random models", false, "", "|total - (selection + mutation)| <= 1e-10"};
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<double> f(n), z(n);
    for (auto& v : f) v = rng.uniform(0.01, 3.0);
    for (auto& v : z) v = rng.uniform(-5.0, 5.0);
    const finite::FiniteModel m(f, random_columns(rng, n, 0.0));
    const auto p = finite::price_decomposition(m, random_state(rng, n), z);
    worst = std::max(worst, std::fabs(p.total - (p.selection + p.mutation)));
  }
  r.pass = worst <= 1e-10;
  r.measured = "max error " + sci(worst);
  return r;
}

CriterionResult fisher_theorem() {
  CriterionResult r{"2", "Fisher's theorem on 1000 mutation-free models", false, "",
                    "|delta - Var/mean| <= 1e-12, delta >= -1e-14"};
  Rng rng(202);
  double worst = 0.0, min_delta = kInf;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<double> f(n);
    for (auto& v : f) v = rng.uniform(0.01, 3.0);
    std::vector<std::vector<double>> id(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) id[k][k] = 1.0;
    const finite::FiniteModel m(f, id);
    const auto d = finite::fisher_delta(m, random_state(rng, n));
    worst = std::max(worst, std::fabs(d.delta - d.var_over_mean));
    min_delta = std::min(min_delta, d.delta);
  }
  r.pass = worst <= 1e-12 && min_delta >= -1e-14;
  r.measured = "max error " + sci(worst) + ", min delta " + sci(min_delta);
  return r;
}

CriterionResult perron_convergence() {
  CriterionResult r{"3", "Perron convergence on 200 random positive 10x10 systems", false, "",
                    "max |x(500) - v| <= 1e-8, residual <= 1e-10, converged"};
  Rng rng(303);
  double worst_x = 0.0, worst_res = 0.0;
  int unconverged = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> f(10);
    for (auto& v : f) v = rng.uniform(0.5, 2.0);
    const finite::FiniteModel m(f, random_columns(rng, 10, 0.1));
    const auto p = finite::perron_eigenpair(m);
    if (!p.converged) ++unconverged;
    worst_res = std::max(worst_res, finite::eigen_residual(m.growth_rows(), p.right_vector, p.eigenvalue));
    const auto traj = finite::evolve(m, finite::PopulationState::uniform(10), 500);
    const auto x = traj.back().state.frequencies();
    for (std::size_t k = 0; k < 10; ++k) worst_x = std::max(worst_x, std::fabs(x[k] - p.right_vector[k]));
  }
  r.pass = unconverged == 0 && worst_x <= 1e-8 && worst_res <= 1e-10;
  r.measured = "max state error " + sci(worst_x) + ", max residual " + sci(worst_res) + ", unconverged " +
               std::to_string(unconverged);
  return r;
}

// ---- gaussian ---------------------------------------------------------------

CriterionResult gaussian_eigenvalue() {
  CriterionResult r{"4", "Gaussian eigenvalue closed form vs discretized operator", false, "",
                    "relative 1e-3 (grid), 1e-12 (nu form vs width form)"};
  gaussian::GaussianPeak p;
  const double closed = gaussian::peak_eigenvalue(p);
  const double grid = gaussian::discretized_dominant_eigenvalue(p, {10.0, 2001, 1e-13, 100000});
  const double rel_grid = std::fabs(grid - closed) / closed;
  double worst_form = 0.0;
  for (int i = 0; i <= 12; ++i) {
    for (int j = 0; j <= 12; ++j) {
      for (int d = 1; d <= 3; ++d) {
        gaussian::GaussianPeak q;
        q.mutation_variance = std::pow(10.0, -3.0 + 0.5 * i);
        q.landscape_variance = std::pow(10.0, -3.0 + 0.5 * j);
        q.dimension = d;
        const double a = gaussian::peak_eigenvalue(q);
        const double b = gaussian::peak_eigenvalue_nu_form(q);
        worst_form = std::max(worst_form, std::fabs(a - b) / a);
      }
    }
  }
  r.pass = rel_grid <= 1e-3 && worst_form <= 1e-12 && std::fabs(closed - 0.618034) < 1e-6;
  r.measured = "closed " + fmt(closed) + ", grid " + fmt(grid) + " (rel " + sci(rel_grid) + "), form gap " +
               sci(worst_form);
  return r;
}

CriterionResult survival_of_flattest() {
  CriterionResult r{"5", "survival of the flattest on a two-peak landscape", false, "",
                    "share on broad-peak side > 0.99 after 2000 steps"};
  gaussian::GaussianPeak narrow, broad;
  narrow.peak_height = 1.0;
  narrow.landscape_variance = 0.05;
  broad.peak_height = 0.8;
  broad.landscape_variance = 10.0;
  const auto cmp = gaussian::flattest_compare(narrow, broad);

  // Grid on [-30, 30] with spacing 0.1; narrow peak at -15, broad at +15.
  const std::size_t n = 601;
  const double dx = 0.1, sigma2 = 1.0;
  std::vector<double> x(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = -30.0 + dx * static_cast<double>(i);
    f[i] = narrow.peak_height * std::exp(-(x[i] + 15.0) * (x[i] + 15.0) / (2.0 * narrow.landscape_variance)) +
           broad.peak_height * std::exp(-(x[i] - 15.0) * (x[i] - 15.0) / (2.0 * broad.landscape_variance));
  }
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (std::size_t m = 0; m < n; ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s += (cols[m][k] = std::exp(-(x[k] - x[m]) * (x[k] - x[m]) / (2.0 * sigma2)));
    }
    for (auto& v : cols[m]) v /= s;
  }
  const finite::FiniteModel model(f, cols);
  const auto traj = finite::evolve(model, finite::PopulationState::uniform(n), 2000);
  double broad_share = 0.0;
  const auto xs = traj.back().state.frequencies();
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) broad_share += xs[i];
  }
  r.pass = broad_share > 0.99 && cmp.winner == gaussian::Winner::B;
  r.measured = "broad share " + fmt(broad_share) + ", closed forms narrow " + fmt(cmp.lambda_a) + " broad " +
               fmt(cmp.lambda_b);
  return r;
}

// ---- tree engine ------------------------------------------------------------

long double independent_mean(const TreeModel& model, const Frontier& f) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += static_cast<long double>(f.shares[i]) * static_cast<long double>(model.fitness(f.states[i]));
  }
  return s;
}

struct RecursionStats {
  double max_error = 0.0;
  std::uint64_t exact_steps = 0;
  double bound = 0.0;
};

// Exact propagation while the frontier fits in 2^20 nodes, then `fallback`
// pruning for the remaining steps.
RecursionStats mass_recursion(const TreeModel& model, std::uint64_t steps, double fallback) {
  RecursionStats st;
  Frontier f = tree::root_frontier(model);
  long double mean = independent_mean(model, f);
  bool pruning = false;
  for (std::uint64_t t = 0; t < steps; ++t) {
    if (!pruning && f.size() > (std::size_t{1} << 18)) pruning = true;
    if (!pruning) st.exact_steps = t + 1;
    const double before = f.log_total_mass;
    f = tree::advance(model, std::move(f), {pruning ? fallback : 0.0, 5'000'000});
    const double err = std::fabs((f.log_total_mass - before) - static_cast<double>(std::log(mean)));
    st.max_error = std::max(st.max_error, err);
    mean = independent_mean(model, f);
  }
  st.bound = f.truncated_share_bound;
  return st;
}

CriterionResult mass_recursion_all() {
  CriterionResult r{"6", "mass recursion log Z(t+1) - log Z(t) = log <f(t)> on every zoo model", false, "",
                    "1e-10 per step, 100 steps"};
  std::vector<zoo::ZooModel> models = {
      constant_ray(1.0),
      zoo::single_ray([](std::uint64_t t) { return 1.0 / (static_cast<double>(t) + 1.0); }, "harmonic_ray", 1.0),
      tiebreaker(),
      zoo::oscillating_block_ray(1.0, 2.0, zoo::geometric_blocks(4)),
      zoo::burst_spine(0.5, 0.5),
      zoo::nonattained_spine(0.5),
      unbounded_default(),
      zoo::lock(constant_ray(1.5), 0.5),
      deception_model(),
      zoo::binary_dyadic(),
      zoo::lock(zoo::binary_dyadic(), 0.25),
      zoo::tensor_product(zoo::binary_dyadic(), zoo::binary_dyadic()),
  };
  double worst = 0.0;
  std::ostringstream notes;
  bool first = true;
  for (const auto& zm : models) {
    const auto st = mass_recursion(*zm, 100, 1e-6);
    worst = std::max(worst, st.max_error);
    if (st.exact_steps < 100) {
      notes << (first ? "" : "; ") << zm.name << " exact to t=" << st.exact_steps << " then prune 1e-6 (bound "
            << sci(st.bound) << ")";
      first = false;
    }
  }
  r.pass = worst <= 1e-10;
  r.measured = "max error " + sci(worst) + " over " + std::to_string(models.size()) + " models; " + notes.str();
  return r;
}

CriterionResult binary_tree(Shared& shared) {
  CriterionResult r{"7", "binary dyadic tree: enumeration, exponent, closed-form monotonicity", false, "",
                    "relative 1e-9 vs 2^20-path enumeration; estimate <= 2 and increasing"};
  // Exhaustive enumeration: Z(20) = sum over bit strings of 2^-20 prod_{s<20} f(prefix_s).
  const int depth = 20;
  long double total = 0.0L;
  std::vector<long double> prod(depth + 1), fit(depth + 1);
  prod[0] = 1.0L;
  fit[0] = 1.0L;
  for (std::uint32_t bits = 0; bits < (1u << depth); ++bits) {
    // Recompute only the suffix that changed since the previous string.
    const int start = bits == 0 ? 0 : depth - 1 - __builtin_ctz(bits);
    for (int s = start; s < depth; ++s) {
      const int b = static_cast<int>((bits >> (depth - 1 - s)) & 1u);
      prod[s + 1] = prod[s] * fit[s];
      fit[s + 1] = fit[s] + (2.0L * b - 1.0L) * std::ldexp(1.0L, -(s + 1));
    }
    total += prod[depth];
  }
  const long double z_enum = total * std::ldexp(1.0L, -depth);
  const auto& traj = shared.binary_exact();
  const double z_engine = std::exp(traj.records.back().log_total_mass);
  const double rel = static_cast<double>(std::fabs((static_cast<long double>(z_engine) - z_enum) / z_enum));

  bool increasing = true, below_two = true;
  double prev = 0.0;
  for (const auto& rec : traj.records) {
    if (rec.running_geometric_mean < prev) increasing = false;
    if (rec.running_geometric_mean > 2.0) below_two = false;
    prev = rec.running_geometric_mean;
  }

  std::size_t violations = 0, checked = 0;
  for (int d = 0; d < 15; ++d) {
    for (std::uint32_t bits = 0; bits < (1u << d); ++bits) {
      std::vector<std::uint32_t> idx(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) idx[static_cast<std::size_t>(j)] = (bits >> (d - 1 - j)) & 1u;
      const double g = zoo::binary_closed_form_exponent(tree::Path::from_indices(idx));
      for (std::uint32_t c = 0; c < 2; ++c) {
        auto child = idx;
        child.push_back(c);
        const double gc = zoo::binary_closed_form_exponent(tree::Path::from_indices(child));
        ++checked;
        if (gc > g || (c == 1 && gc != g)) ++violations;
      }
    }
  }
  r.pass = rel <= 1e-9 && increasing && below_two && violations == 0;
  r.measured = "Z(20) engine " + fmt(z_engine) + " enum " + fmt(static_cast<double>(z_enum)) + " (rel " + sci(rel) +
               "), estimate at t=20 " + fmt(prev) + (increasing ? " increasing" : " NOT increasing") + ", " +
               std::to_string(violations) + "/" + std::to_string(checked) + " parent-child violations";
  return r;
}

CriterionResult monotonicity() {
  CriterionResult r{"8", "monotonicity Z_n(t+k) >= q Z_m(t) on 500 sampled triples", false, "",
                    "log-domain slack 1e-9"};
  struct Entry {
    zoo::ZooModel model;
    std::uint64_t max_t;
  };
  std::vector<Entry> entries = {
      {zoo::binary_dyadic(), 10},
      {zoo::burst_spine(0.5, 0.5), 40},
      {zoo::lock(zoo::binary_dyadic(), 0.25), 9},
      {zoo::nonattained_spine(0.5), 40},
      {tiebreaker(), 40},
      {unbounded_default(), 30},
      {deception_model(), 20},
      {zoo::oscillating_block_ray(1.0, 2.0, zoo::geometric_blocks(4)), 40},
  };
  Rng rng(808);
  double worst = -kInf;  // largest violation log(q Z_m) - log Z_n
  std::size_t triples = 0, comparisons = 0;
  std::vector<tree::Child> kids;
  auto walk = [&](const TreeModel& m, tree::NodeRef node, std::uint64_t steps) -> std::optional<tree::NodeRef> {
    for (std::uint64_t s = 0; s < steps; ++s) {
      if (!(m.fitness(node.state) > 0.0)) return std::nullopt;
      kids.clear();
      m.children(node.state, kids);
      double u = rng.uniform(0.0, 1.0), acc = 0.0;
      std::size_t pick = kids.size() - 1;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        acc += kids[i].probability;
        if (u < acc) {
          pick = i;
          break;
        }
      }
      node = {node.path.child(kids[pick].index), kids[pick].state};
    }
    return node;
  };
  while (triples < 500) {
    const auto& e = entries[triples % entries.size()];
    const TreeModel& m = *e.model;
    const auto n = walk(m, {tree::Path{}, m.root()}, rng.index(7));
    if (!n) continue;
    const std::uint64_t k = 1 + rng.index(4);
    const auto dest = walk(m, *n, k);
    if (!dest) continue;
    const double q = tree::path_transition_mass(m, *n, dest->path);
    if (!(q > 0.0)) continue;
    const std::uint64_t t = 1 + rng.index(static_cast<std::size_t>(e.max_t));
    const auto zn = tree::lineage_sizes(m, *n, t + k, {0.0, 5'000'000});
    const auto zm = tree::lineage_sizes(m, *dest, t, {0.0, 5'000'000});
    for (std::uint64_t s = 0; s <= t; ++s) {
      worst = std::max(worst, std::log(q) + zm[s] - zn[s + k]);
      ++comparisons;
    }
    ++triples;
  }
  r.pass = worst <= 1e-9;
  r.measured = std::to_string(triples) + " triples, " + std::to_string(comparisons) +
               " comparisons, max log(q Z_m) - log Z_n = " + sci(worst);
  return r;
}

CriterionResult tiebreaker_share() {
  CriterionResult r{"9", "tiebreaker: ray-b share equals 1/(t+1)", false, "", "1e-12 for t <= 100"};
  const auto zm = tiebreaker();
  const auto traj = tree::run_tree(*zm, 100, {0.0, 5'000'000}, {tag_trait(tree::kTagRayB, "ray_b")});
  double worst = 0.0;
  for (const auto& rec : traj.records) {
    worst = std::max(worst, std::fabs(rec.trait_shares[0] - 1.0 / (static_cast<double>(rec.time) + 1.0)));
  }
  r.pass = worst <= 1e-12 && traj.records.size() == 100;
  r.measured = "max error " + sci(worst) + ", share at t=100 " + fmt(traj.records.back().trait_shares[0]);
  return r;
}

CriterionResult burst_spine_limits() {
  CriterionResult r{"10", "burst-spine odd/even limits and geometric-mean floor", false, "",
                    "1e-6 on limits; floor >= 0.5 - 1e-3"};
  const auto zm = zoo::burst_spine(0.5, 0.5);
  const auto traj = tree::run_tree(*zm, 200, {0.0, 5'000'000}, {});
  double odd = 0.0, even = 0.0;
  for (auto it = traj.records.rbegin(); it != traj.records.rend(); ++it) {
    if (it->time % 2 == 1 && odd == 0.0) odd = it->mean_fitness;
    if (it->time % 2 == 0 && even == 0.0) even = it->mean_fitness;
  }
  const auto floor = analysis::geometric_mean_floor_check(traj, 0.5, 1.0, 0.25, 1e-3);
  const auto lim = zoo::burst_spine_limits(0.5, 0.5);
  const bool closed_ok = std::fabs(lim.mean_odd - 0.4) < 1e-12 && std::fabs(lim.mean_even - 0.625) < 1e-12;
  r.pass = std::fabs(odd - 0.4) <= 1e-6 && std::fabs(even - 0.625) <= 1e-6 && floor.passes && closed_ok;
  r.measured = "odd " + fmt(odd) + " (err " + sci(std::fabs(odd - 0.4)) + "), even " + fmt(even) + " (err " +
               sci(std::fabs(even - 0.625)) + "), floor " + fmt(floor.floor_estimate);
  return r;
}

CriterionResult locking_convergence(Shared& shared) {
  CriterionResult r{"11", "eta-locking convergence on nonattained_spine(0.5)", false, "",
                    "<f> strictly increasing for t > 10, final <f> >= 0.97, concentration(1, 0.05) >= 0.9"};
  const auto& traj = shared.nonattained_run();
  std::size_t breaks = 0;
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    if (traj.records[i].time > 10 && !(traj.records[i].mean_fitness > traj.records[i - 1].mean_fitness)) ++breaks;
  }
  const double final_mean = traj.records.back().mean_fitness;
  const double conc = analysis::concentration_mass(traj.final_frontier, 1.0, 0.05);
  r.pass = breaks == 0 && final_mean >= 0.97 && conc >= 0.9 && traj.records.size() == 5000;
  r.measured = "final <f> " + fmt(final_mean) + ", concentration " + fmt(conc) + ", monotonicity breaks " +
               std::to_string(breaks) + ", frontier " + std::to_string(traj.final_frontier.size());
  return r;
}

// Certified lower bound on the locked share of lock(binary_dyadic, eta). The
// pruned run gives a lower bound on locked mass; unlocked mass is exactly
// (1 - eta)^t Z_bin(t), bounded above with the exact Z_bin up to t = 20 and
// the per-depth fitness maximum 2 - 2^-s beyond.
CriterionResult locked_takeover(Shared& shared) {
  CriterionResult r{"12", "locked-trait floor and takeover on lock(binary_dyadic, eta)", false, "",
                    "certified share >= eta - 1e-12 at every t >= 1 and >= 0.95 at t = 200 (prune 1e-7)"};
  const auto& bin = shared.binary_exact();
  std::vector<double> log_zbin{0.0};
  for (const auto& rec : bin.records) log_zbin.push_back(rec.log_total_mass);
  auto log_zbin_upper = [&](std::uint64_t t) {
    const std::uint64_t known = std::min<std::uint64_t>(t, log_zbin.size() - 1);
    double v = log_zbin[known];
    for (std::uint64_t s = known; s < t; ++s) v += std::log(2.0 - std::ldexp(1.0, -static_cast<int>(s)));
    return v;
  };

  bool pass = true;
  std::ostringstream m;
  for (double eta : {0.1, 0.25, 0.5}) {
    const auto zm = zoo::lock(zoo::binary_dyadic(), eta);
    double min_raw = kInf, min_cert = kInf, final_raw = 0.0, final_cert = 0.0;
    double log_keep = 0.0, prev_bound = 0.0;
    const auto traj = tree::run_tree(
        *zm, 200, {1e-7, 5'000'000}, {tag_trait(tree::kTagLocked, "locked")},
        [&](const tree::StepRecord& rec, const Frontier&) {
          const double removed = rec.truncated_share_bound - prev_bound;
          prev_bound = rec.truncated_share_bound;
          log_keep += std::log1p(-removed);
          const double pi = rec.trait_shares[0];
          double cert = pi;
          if (rec.truncated_share_bound > 0.0) {
            const double log_locked = std::log(pi) + rec.log_total_mass + log_keep;
            const double log_unlocked = static_cast<double>(rec.time) * std::log1p(-eta) + log_zbin_upper(rec.time);
            cert = 1.0 / (1.0 + std::exp(log_unlocked - log_locked));
          }
          min_raw = std::min(min_raw, pi);
          min_cert = std::min(min_cert, cert);
          final_raw = pi;
          final_cert = cert;
        });
    const bool ok = traj.records.size() == 200 && min_cert >= eta - 1e-12 && final_cert >= 0.95;
    pass = pass && ok;
    m << "eta " << eta << ": min " << fmt(min_cert) << " final " << fmt(final_cert) << " (run " << fmt(min_raw) << "/"
      << fmt(final_raw) << ", pruned " << sci(traj.final_frontier.truncated_share_bound) << "); ";
  }
  r.pass = pass;
  r.measured = m.str();
  return r;
}

CriterionResult unbounded_fitness(Shared& shared) {
  CriterionResult r{"13", "unbounded fitness: limsup <f> and recurring zero-fitness mass", false, "",
                    "max <f> > 1e6; zero-fitness share >= 0.3 at >= 30 of 100 steps"};
  const auto& u = shared.unbounded_run();
  double max_mean = 0.0, max_zero = 0.0;
  for (const auto& rec : u.traj.records) max_mean = std::max(max_mean, rec.mean_fitness);
  std::size_t hits = 0;
  for (double z : u.zero_share) {
    max_zero = std::max(max_zero, z);
    if (z >= 0.3) ++hits;
  }
  const double tail_zero = u.zero_share.empty() ? 0.0 : u.zero_share.back();
  r.pass = max_mean > 1e6 && hits >= 30;
  r.measured = "max <f> " + sci(max_mean) + ", steps with zero share >= 0.3: " + std::to_string(hits) +
               "/100 (max " + fmt(max_zero) + ", final " + fmt(tail_zero) + ")";
  return r;
}

CriterionResult deception() {
  CriterionResult r{"14", "capability/deception decomposition on a tensor of locked spines", false, "",
                    "<f_C>, <f_D> >= 0.95 at t = 3000; |<f_C> + <f_D> - <f>| <= 1e-10; prune 1e-30 bound < 1e-10"};
  const auto zm = deception_model();
  double worst = 0.0;
  analysis::CoordinateMeans last;
  const auto traj = tree::run_tree(*zm, 3000, {1e-30, 5'000'000}, {},
                                   [&](const tree::StepRecord& rec, const Frontier& f) {
                                     last = analysis::coordinate_means(f, *zm);
                                     worst = std::max(worst, std::fabs(last.mean_c + last.mean_d - rec.mean_fitness));
                                   });
  const double bound = traj.final_frontier.truncated_share_bound;
  r.pass = traj.records.size() == 3000 && last.mean_c >= 0.95 && last.mean_d >= 0.95 && worst <= 1e-10 && bound < 1e-10;
  r.measured = "<f_C> " + fmt(last.mean_c) + ", <f_D> " + fmt(last.mean_d) + ", additivity error " + sci(worst) +
               ", pruned " + sci(bound) + ", frontier " + std::to_string(traj.final_frontier.size());
  return r;
}

CriterionResult utility(Shared& shared) {
  CriterionResult r{"15", "expected utility near mu(f*) and -inf flagging", false, "",
                    "|U - 1| <= 0.1 with mu = f^2; -inf flagged exactly when zero-fitness mass is present"};
  const auto eu = analysis::expected_utility(shared.nonattained_run().final_frontier, analysis::square_utility());
  const auto& u = shared.unbounded_run();
  std::size_t mismatches = 0, flagged = 0;
  for (std::size_t i = 0; i < u.zero_share.size(); ++i) {
    const bool present = u.zero_share[i] > 0.0;
    if (present != u.log_flagged[i]) ++mismatches;
    if (u.log_flagged[i]) ++flagged;
  }
  r.pass = std::fabs(eu.value - 1.0) <= 0.1 && mismatches == 0;
  r.measured = "U(f^2) " + fmt(eu.value) + "; log utility flagged at " + std::to_string(flagged) + "/" +
               std::to_string(u.zero_share.size()) + " steps, mismatches " + std::to_string(mismatches);
  return r;
}

CriterionResult particle_cross_check(Shared& shared) {
  CriterionResult r{"16", "particle oracle vs deterministic engine", false, "",
                    "|<f(t)> difference| <= 5/sqrt(200000) for t <= 20, seeds 1,2,3"};
  const std::size_t particles = 200000;
  const double tol = 5.0 / std::sqrt(static_cast<double>(particles));
  double worst = 0.0;
  std::ostringstream m;
  auto compare = [&](const zoo::ZooModel& zm, const tree::Trajectory& traj) {
    std::vector<double> exact{tree::mean_fitness(tree::root_frontier(*zm))};
    for (const auto& rec : traj.records) exact.push_back(rec.mean_fitness);
    double w = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto est = tree::particle_oracle(*zm, particles, 20, seed, {});
      for (std::size_t t = 0; t <= 20; ++t) w = std::max(w, std::fabs(est[t].mean_fitness - exact[t]));
    }
    m << zm.name << " " << sci(w) << "; ";
    worst = std::max(worst, w);
  };
  compare(zoo::binary_dyadic(), shared.binary_exact());
  const auto bs = zoo::burst_spine(0.5, 0.5);
  compare(bs, tree::run_tree(*bs, 20, {0.0, 5'000'000}, {}));
  r.pass = worst <= tol;
  r.measured = m.str() + "tolerance " + fmt(tol);
  return r;
}

CriterionResult oscillating_blocks() {
  CriterionResult r{"17", "oscillating geometric blocks (ratio 4) over 1e5 steps", false, "",
                    "1e-9 vs exact block-boundary means; alternate below 1.2 / above 1.7"};
  const std::uint64_t horizon = 100000;
  const auto zm = zoo::oscillating_block_ray(1.0, 2.0, zoo::geometric_blocks(4));
  const auto traj = tree::run_tree(*zm, horizon, {0.0, 5'000'000}, {});
  const auto bounds = zoo::block_boundaries(1.0, 2.0, zoo::geometric_blocks(4), horizon);
  double worst = 0.0;
  bool alternates = true;
  std::ostringstream seq;
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const double g = traj.records[bounds[k].time - 1].running_geometric_mean;
    worst = std::max(worst, std::fabs(g - bounds[k].geometric_mean));
    if (k >= 1) {
      const bool high_block = k % 2 == 1;
      if (high_block ? !(g > 1.7) : !(g < 1.2)) alternates = false;
    }
    seq << (k ? " " : "") << fmt(g);
  }
  r.pass = worst <= 1e-9 && alternates && bounds.size() >= 6;
  r.measured = "max error " + sci(worst) + ", boundary means " + seq.str();
  return r;
}

const char* kBuiltinFixture = R"({"fitness": [1.0, 2.0, 0.5],
  "mutation": [[0.9, 0.05, 0.05], [0.1, 0.8, 0.1], [0.0, 0.5, 0.5]]})";

CriterionResult fixture(const std::string& path) {
  CriterionResult r{"F", "finite model fixture validates", false, "", "columns sum to 1 within 1e-12"};
  try {
    const auto m = path.empty() ? finite::FiniteModel::from_json(nlohmann::json::parse(kBuiltinFixture))
                                : finite::FiniteModel::load(path);
    r.pass = true;
    r.measured = (path.empty() ? std::string("built-in") : path) + ": N=" + std::to_string(m.size());
  } catch (const Error& e) {
    r.measured = e.what();
  }
  return r;
}

}  // namespace

std::vector<std::string> criterion_ids() {
  return {"1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "13", "14", "15", "16", "17", "F"};
}

std::vector<CriterionResult> verify(const VerifyOptions& options, const Reporter& on_result) {
  Shared shared;
  const std::map<std::string, std::function<CriterionResult()>> table = {
      {"1", price_identity},
      {"2", fisher_theorem},
      {"3", perron_convergence},
      {"4", gaussian_eigenvalue},
      {"5", survival_of_flattest},
      {"6", mass_recursion_all},
      {"7", [&] { return binary_tree(shared); }},
      {"8", monotonicity},
      {"9", tiebreaker_share},
      {"10", burst_spine_limits},
      {"11", [&] { return locking_convergence(shared); }},
      {"12", [&] { return locked_takeover(shared); }},
      {"13", [&] { return unbounded_fitness(shared); }},
      {"14", deception},
      {"15", [&] { return utility(shared); }},
      {"16", [&] { return particle_cross_check(shared); }},
      {"17", oscillating_blocks},
      {"F", [&] { return fixture(options.fixture_path); }},
  };
  std::vector<CriterionResult> out;
  for (const auto& id : criterion_ids()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = table.at(id)();
    } catch (const std::exception& e) {
      res.id = id;
      res.name = "criterion " + id;
      res.pass = false;
      res.measured = std::string("threw: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::string id = r.id;
  id.resize(std::max<std::size_t>(id.size(), 2), ' ');
  return std::string(r.pass ? "PASS" : "FAIL") + "  " + id + "  " + r.name + " | measured: " + r.measured +
         " | tolerance: " + r.tolerance;
}

}  // namespace evotree::acceptance
