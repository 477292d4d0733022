#pragma once
// Evolution on an infinite rooted tree of programs.
//
// A TreeModel is a lazy generator: given a node it reports the node's fitness,
// its finite child distribution (a column of Q) and descriptive labels. Models
// describe nodes by a small fixed-width NodeState that they derive
// incrementally from the parent, so the engine never has to replay a path.
//
// The engine keeps the population as normalized shares on the current
// generation plus log Z_o(t), the log of the unnormalized total mass. Since
// the structure is a tree, every node alive at time t sits at depth t.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evotree/path.hpp"

namespace evotree::tree {

inline constexpr std::size_t kStateSlots = 8;

/// Model-defined node descriptor. The meaning of each slot belongs to the
/// model; composite models (locking, tensor products) embed their inner
/// models' slots at an offset.
struct NodeState {
  std::array<double, kStateSlots> slot{};
  friend bool operator==(const NodeState&, const NodeState&) = default;
};

enum Tag : std::uint32_t {
  kTagLocked = 1u << 0,
  kTagSpine = 1u << 1,
  kTagBurst = 1u << 2,
  kTagDead = 1u << 3,
  kTagRayA = 1u << 4,
  kTagRayB = 1u << 5,
};

std::vector<std::string> tag_names(std::uint32_t tags);
std::optional<Tag> tag_from_name(const std::string& name);

struct Labels {
  std::uint32_t tags = 0;
  // Additive fitness coordinates on tensor-product models.
  std::optional<double> f_c;
  std::optional<double> f_d;

  bool has(Tag t) const { return (tags & t) != 0; }
};

struct Child {
  std::uint32_t index = 0;
  double probability = 0.0;
  NodeState state;
};

/// Contract: child probabilities are >= 0 and sum to 1 when non-empty; a node
/// without children has fitness 0; every call is a pure function of its
/// arguments.
class TreeModel {
 public:
  virtual ~TreeModel() = default;

  virtual NodeState root() const = 0;
  virtual double fitness(const NodeState& node) const = 0;
  /// Appends to `out` (which the caller clears).
  virtual void children(const NodeState& node, std::vector<Child>& out) const = 0;
  virtual Labels labels(const NodeState& node) const = 0;
  /// Number of NodeState slots this model uses.
  virtual std::size_t state_width() const = 0;
  /// f*, the supremum of reachable fitness; +inf when unbounded, nullopt when
  /// the model does not declare one.
  virtual std::optional<double> fitness_supremum() const { return std::nullopt; }

  /// State of the node at `path`, found by walking from the root.
  /// Throws Error{InvalidModel} if the path leaves the tree.
  NodeState resolve(const Path& path) const;
};

using ModelPtr = std::shared_ptr<const TreeModel>;

struct NodeRef {
  Path path;
  NodeState state;
  std::uint64_t depth() const { return path.depth(); }
};

/// What a trait predicate gets to look at.
struct NodeInfo {
  const Path& path;
  const NodeState& state;
  double fitness;
  const Labels& labels;
};

struct TraitPredicate {
  std::string name;
  std::function<bool(const NodeInfo&)> test;
};

/// x(t) on generation t plus log Z_o(t). Structure of arrays: entry i of each
/// vector describes the same node.
struct Frontier {
  std::vector<Path> paths;
  std::vector<NodeState> states;
  std::vector<double> shares;
  std::vector<double> fitness;
  double log_total_mass = 0.0;
  std::uint64_t depth = 0;
  double truncated_share_bound = 0.0;
  bool extinct = false;

  std::size_t size() const { return shares.size(); }
};

struct StepRecord {
  std::uint64_t time = 0;              // t, the generation produced by this step
  double mean_fitness = 0.0;           // <f(t)> on the stored x(t); the next step grows log Z by its log
  double log_total_mass = 0.0;         // log Z_o(t)
  double running_geometric_mean = 0.0; // Z_o(t)^{1/t}
  std::vector<double> trait_shares;    // pi_T(t), in the order traits were given
  double truncated_share_bound = 0.0;
  bool extinct = false;
};

struct Trajectory {
  std::vector<std::string> trait_names;
  std::vector<StepRecord> records;
  Frontier final_frontier;
  // Time of the step at which the population went extinct.
  std::optional<std::uint64_t> extinct_at;
};

struct AdvanceOptions {
  double prune_threshold = 0.0;
  // Error{FrontierExplosion} when the next generation would hold more nodes.
  std::size_t max_frontier = 5'000'000;
};

/// Reads EVOTREE_MAX_FRONTIER, defaulting to 5,000,000.
std::size_t max_frontier_from_env();

Frontier root_frontier(const TreeModel& model);
/// Single unit of mass on `origin`.
Frontier origin_frontier(const TreeModel& model, const NodeRef& origin);

double mean_fitness(const Frontier& frontier);

/// One generation. On extinction the returned frontier is empty with
/// `extinct` set and log_total_mass = -inf.
Frontier advance(const TreeModel& model, Frontier frontier, const AdvanceOptions& options,
                 StepRecord* record = nullptr);

double trait_share(const Frontier& frontier, const TreeModel& model, const TraitPredicate& trait);

/// Calls `observer` after every step with the record and the new frontier.
using StepObserver = std::function<void(const StepRecord&, const Frontier&)>;

Trajectory run_tree(const TreeModel& model, std::uint64_t steps, const AdvanceOptions& options,
                    const std::vector<TraitPredicate>& traits, const StepObserver& observer = {});

/// log Z_origin(s) for s = 0..steps (element 0 is 0). Extinction fills the
/// remaining entries with -inf.
std::vector<double> lineage_sizes(const TreeModel& model, const NodeRef& origin, std::uint64_t steps,
                                  const AdvanceOptions& options);

/// (A^k)_{mn} along the unique path from `ancestor` to `descendant`: the
/// product of parent fitness times transition probability. 0 if unreachable.
double path_transition_mass(const TreeModel& model, const NodeRef& ancestor, const Path& descendant);

struct ExponentEstimate {
  std::uint64_t horizon = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t window = 0;
  bool full_sequence_available = true;
};

/// Min and max of exp(log Z(t) / t) over the trailing `window` entries.
/// Throws Error{TooShort} if the sequence is not longer than the window.
ExponentEstimate exponent_estimate(const std::vector<double>& log_sizes, std::size_t window);

struct ParticleRecord {
  double mean_fitness = 0.0;
  std::vector<double> trait_shares;
};

/// Monte Carlo counterpart of run_tree: element t estimates <f(t)> and the
/// trait shares of x(t), for t = 0..steps. Systematic resampling,
/// deterministic given the seed. Throws Error{Extinction}.
std::vector<ParticleRecord> particle_oracle(const TreeModel& model, std::size_t particles,
                                            std::uint64_t steps, std::uint64_t seed,
                                            const std::vector<TraitPredicate>& traits);

/// Visits every node reachable from the root within `max_depth` levels by a
/// positive-probability path, depth first. Stops early (returning false) if
/// `visit` returns false or `max_nodes` is reached.
bool visit_reachable(const TreeModel& model, std::uint64_t max_depth, std::size_t max_nodes,
                     const std::function<bool(const NodeRef&, double fitness)>& visit);

}  // namespace evotree::tree
