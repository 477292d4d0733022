#include "evotree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "evotree/errors.hpp"
#include "evotree/kernels.hpp"

namespace evotree::tree {

namespace {

constexpr std::pair<Tag, const char*> kTagNames[] = {
    {kTagLocked, "locked"}, {kTagSpine, "spine"}, {kTagBurst, "burst"},
    {kTagDead, "dead"},     {kTagRayA, "ray_a"},  {kTagRayB, "ray_b"},
};

void append(Frontier& f, Path path, const NodeState& state, double share, double fitness) {
  f.paths.push_back(std::move(path));
  f.states.push_back(state);
  f.shares.push_back(share);
  f.fitness.push_back(fitness);
}

void renormalize(Frontier& f) {
  const double total = kernels::sum(f.shares);
  if (total > 0.0) kernels::scale(f.shares, 1.0 / total);
}

}  // namespace

std::vector<std::string> tag_names(std::uint32_t tags) {
  std::vector<std::string> out;
  for (const auto& [tag, name] : kTagNames) {
    if (tags & tag) out.emplace_back(name);
  }
  return out;
}

std::optional<Tag> tag_from_name(const std::string& name) {
  for (const auto& [tag, n] : kTagNames) {
    if (name == n) return tag;
  }
  return std::nullopt;
}

NodeState TreeModel::resolve(const Path& path) const {
  NodeState state = root();
  std::vector<Child> kids;
  for (auto index : path.indices()) {
    kids.clear();
    children(state, kids);
    auto it = std::find_if(kids.begin(), kids.end(), [&](const Child& c) { return c.index == index; });
    if (it == kids.end()) {
      throw Error(ErrorCode::InvalidModel, "path " + path.to_string() + " leaves the tree");
    }
    state = it->state;
  }
  return state;
}

std::size_t max_frontier_from_env() {
  if (const char* env = std::getenv("EVOTREE_MAX_FRONTIER")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 5'000'000;
}

Frontier origin_frontier(const TreeModel& model, const NodeRef& origin) {
  Frontier f;
  append(f, origin.path, origin.state, 1.0, model.fitness(origin.state));
  f.depth = origin.depth();
  return f;
}

Frontier root_frontier(const TreeModel& model) { return origin_frontier(model, {Path{}, model.root()}); }

double mean_fitness(const Frontier& frontier) { return kernels::dot(frontier.shares, frontier.fitness); }

Frontier advance(const TreeModel& model, Frontier frontier, const AdvanceOptions& options,
                 StepRecord* record) {
  if (options.prune_threshold < 0.0 || options.prune_threshold >= 1.0) {
    throw Error(ErrorCode::ParameterRange, "prune_threshold must lie in [0, 1)");
  }
  const double mean = frontier.extinct ? 0.0 : mean_fitness(frontier);
  Frontier next;
  next.depth = frontier.depth + 1;
  next.truncated_share_bound = frontier.truncated_share_bound;

  if (!(mean > 0.0)) {
    next.extinct = true;
    next.log_total_mass = -std::numeric_limits<double>::infinity();
  } else {
    next.log_total_mass = frontier.log_total_mass + std::log(mean);
    std::vector<Child> kids;
    const double inv_mean = 1.0 / mean;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const double weight = frontier.shares[i] * frontier.fitness[i] * inv_mean;
      if (!(weight > 0.0)) continue;
      kids.clear();
      model.children(frontier.states[i], kids);
      for (std::size_t k = 0; k < kids.size(); ++k) {
        const auto& kid = kids[k];
        const double share = weight * kid.probability;
        // Shares that underflow carry no representable mass.
        if (!(share > 0.0)) continue;
        if (next.size() >= options.max_frontier) {
          throw Error(ErrorCode::FrontierExplosion,
                      "generation " + std::to_string(next.depth) + " exceeds " +
                          std::to_string(options.max_frontier) + " nodes; raise the prune threshold");
        }
        Path path;
        if (k + 1 == kids.size()) {
          path = std::move(frontier.paths[i]);
          path.extend(kid.index);
        } else {
          path = frontier.paths[i].child(kid.index);
        }
        append(next, std::move(path), kid.state, share, model.fitness(kid.state));
      }
    }
    renormalize(next);
    if (options.prune_threshold > 0.0) {
      double removed = 0.0;
      std::size_t keep = 0;
      // The largest entry always survives, so pruning alone never empties x(t).
      const auto largest = static_cast<std::size_t>(
          std::max_element(next.shares.begin(), next.shares.end()) - next.shares.begin());
      for (std::size_t i = 0; i < next.size(); ++i) {
        if (i != largest && next.shares[i] < options.prune_threshold) {
          removed += next.shares[i];
          continue;
        }
        if (keep != i) {
          next.paths[keep] = std::move(next.paths[i]);
          next.states[keep] = next.states[i];
          next.shares[keep] = next.shares[i];
          next.fitness[keep] = next.fitness[i];
        }
        ++keep;
      }
      next.paths.resize(keep);
      next.states.resize(keep);
      next.shares.resize(keep);
      next.fitness.resize(keep);
      next.truncated_share_bound += removed;
      renormalize(next);
    }
    if (next.size() == 0) next.extinct = true;
  }

  if (record != nullptr) {
    record->time = next.depth;
    record->mean_fitness = next.extinct ? 0.0 : mean_fitness(next);
    record->log_total_mass = next.log_total_mass;
    record->running_geometric_mean = std::exp(next.log_total_mass / static_cast<double>(next.depth));
    record->truncated_share_bound = next.truncated_share_bound;
    record->extinct = next.extinct;
  }
  return next;
}

double trait_share(const Frontier& frontier, const TreeModel& model, const TraitPredicate& trait) {
  double share = 0.0;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const Labels labels = model.labels(frontier.states[i]);
    if (trait.test(NodeInfo{frontier.paths[i], frontier.states[i], frontier.fitness[i], labels})) {
      share += frontier.shares[i];
    }
  }
  return share;
}

namespace {

std::vector<double> all_trait_shares(const Frontier& frontier, const TreeModel& model,
                                     const std::vector<TraitPredicate>& traits) {
  std::vector<double> shares(traits.size(), 0.0);
  if (traits.empty()) return shares;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const Labels labels = model.labels(frontier.states[i]);
    const NodeInfo info{frontier.paths[i], frontier.states[i], frontier.fitness[i], labels};
    for (std::size_t k = 0; k < traits.size(); ++k) {
      if (traits[k].test(info)) shares[k] += frontier.shares[i];
    }
  }
  return shares;
}

}  // namespace

Trajectory run_tree(const TreeModel& model, std::uint64_t steps, const AdvanceOptions& options,
                    const std::vector<TraitPredicate>& traits, const StepObserver& observer) {
  Trajectory out;
  for (const auto& t : traits) out.trait_names.push_back(t.name);
  Frontier frontier = root_frontier(model);
  out.records.reserve(steps);
  for (std::uint64_t t = 0; t < steps; ++t) {
    StepRecord record;
    frontier = advance(model, std::move(frontier), options, &record);
    record.trait_shares = all_trait_shares(frontier, model, traits);
    if (observer) observer(record, frontier);
    out.records.push_back(std::move(record));
    if (frontier.extinct) {
      out.extinct_at = frontier.depth;
      break;
    }
  }
  out.final_frontier = std::move(frontier);
  return out;
}

std::vector<double> lineage_sizes(const TreeModel& model, const NodeRef& origin, std::uint64_t steps,
                                  const AdvanceOptions& options) {
  std::vector<double> out;
  out.reserve(steps + 1);
  Frontier frontier = origin_frontier(model, origin);
  out.push_back(0.0);
  for (std::uint64_t s = 0; s < steps; ++s) {
    if (frontier.extinct) {
      out.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    frontier = advance(model, std::move(frontier), options);
    out.push_back(frontier.log_total_mass);
  }
  return out;
}

double path_transition_mass(const TreeModel& model, const NodeRef& ancestor, const Path& descendant) {
  if (!descendant.starts_with(ancestor.path)) return 0.0;
  const auto full = descendant.indices();
  NodeState state = ancestor.state;
  double mass = 1.0;
  std::vector<Child> kids;
  for (std::size_t d = ancestor.depth(); d < full.size(); ++d) {
    kids.clear();
    model.children(state, kids);
    auto it = std::find_if(kids.begin(), kids.end(), [&](const Child& c) { return c.index == full[d]; });
    if (it == kids.end()) return 0.0;
    mass *= model.fitness(state) * it->probability;
    state = it->state;
  }
  return mass;
}

ExponentEstimate exponent_estimate(const std::vector<double>& log_sizes, std::size_t window) {
  if (window < 1 || log_sizes.size() <= window) {
    throw Error(ErrorCode::TooShort, "need more than " + std::to_string(window) + " entries, got " +
                                         std::to_string(log_sizes.size()));
  }
  ExponentEstimate est;
  est.horizon = log_sizes.size() - 1;
  est.window = window;
  est.lower = std::numeric_limits<double>::infinity();
  est.upper = -std::numeric_limits<double>::infinity();
  for (std::size_t t = log_sizes.size() - window; t < log_sizes.size(); ++t) {
    const double g = std::exp(log_sizes[t] / static_cast<double>(t));
    est.lower = std::min(est.lower, g);
    est.upper = std::max(est.upper, g);
  }
  return est;
}

std::vector<ParticleRecord> particle_oracle(const TreeModel& model, std::size_t particles,
                                            std::uint64_t steps, std::uint64_t seed,
                                            const std::vector<TraitPredicate>& traits) {
  if (particles < 1) throw Error(ErrorCode::ParameterRange, "particles must be >= 1");
  struct Particle {
    Path path;
    NodeState state;
    double fitness;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const NodeState root = model.root();
  std::vector<Particle> pop(particles, Particle{Path{}, root, model.fitness(root)});
  std::vector<Particle> resampled(particles);
  std::vector<double> cumulative(particles);
  std::vector<Child> kids;
  std::vector<ParticleRecord> out;
  out.reserve(steps + 1);
  const double n = static_cast<double>(particles);

  for (std::uint64_t t = 0;; ++t) {
    ParticleRecord rec;
    rec.trait_shares.assign(traits.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < particles; ++i) {
      total += pop[i].fitness;
      cumulative[i] = total;
      if (!traits.empty()) {
        const Labels labels = model.labels(pop[i].state);
        const NodeInfo info{pop[i].path, pop[i].state, pop[i].fitness, labels};
        for (std::size_t k = 0; k < traits.size(); ++k) {
          if (traits[k].test(info)) rec.trait_shares[k] += 1.0 / n;
        }
      }
    }
    rec.mean_fitness = total / n;
    out.push_back(std::move(rec));
    if (t == steps) break;
    if (!(total > 0.0)) throw Error(ErrorCode::Extinction, "all particles have zero fitness");

    // systematic resampling proportional to fitness
    const double stride = total / n;
    double u = unit(rng) * stride;
    std::size_t j = 0;
    for (std::size_t i = 0; i < particles; ++i, u += stride) {
      while (j + 1 < particles && cumulative[j] <= u) ++j;
      resampled[i] = pop[j];
    }
    // mutation: each particle moves to a child drawn from Q
    for (std::size_t i = 0; i < particles; ++i) {
      kids.clear();
      model.children(resampled[i].state, kids);
      if (kids.empty()) throw Error(ErrorCode::InvalidModel, "resampled a node without children");
      const double r = unit(rng);
      double acc = 0.0;
      std::size_t pick = kids.size() - 1;
      for (std::size_t k = 0; k < kids.size(); ++k) {
        acc += kids[k].probability;
        if (r < acc) {
          pick = k;
          break;
        }
      }
      pop[i].path = resampled[i].path.child(kids[pick].index);
      pop[i].state = kids[pick].state;
      pop[i].fitness = model.fitness(pop[i].state);
    }
  }
  return out;
}

bool visit_reachable(const TreeModel& model, std::uint64_t max_depth, std::size_t max_nodes,
                     const std::function<bool(const NodeRef&, double fitness)>& visit) {
  std::vector<NodeRef> stack{{Path{}, model.root()}};
  std::vector<Child> kids;
  std::size_t visited = 0;
  while (!stack.empty()) {
    NodeRef node = std::move(stack.back());
    stack.pop_back();
    if (++visited > max_nodes) return false;
    if (!visit(node, model.fitness(node.state))) return false;
    if (node.depth() >= max_depth) continue;
    kids.clear();
    model.children(node.state, kids);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (it->probability > 0.0) stack.push_back({node.path.child(it->index), it->state});
    }
  }
  return true;
}

}  // namespace evotree::tree
