#pragma once
// Worked examples as TreeModels, each carrying the closed-form reference
// values its tests compare against.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "evotree/tree.hpp"

namespace evotree::zoo {

using FitnessSequence = std::function<double(std::uint64_t depth)>;
using BlockLength = std::function<std::uint64_t(std::uint64_t block)>;

struct Reference {
  double value = 0.0;
  std::string formula;
};

struct ZooModel {
  tree::ModelPtr model;
  std::string name;
  std::map<std::string, double> parameters;
  std::map<std::string, Reference> references;
  // f*; +inf when unbounded, NaN when not declared.
  double fitness_supremum = std::numeric_limits<double>::quiet_NaN();

  const tree::TreeModel& operator*() const { return *model; }
  const tree::TreeModel* operator->() const { return model.get(); }
};

/// One child per node with probability 1; the node at depth t has fitness
/// `fitness(t)`.
ZooModel single_ray(FitnessSequence fitness, std::string name = "single_ray",
                    double supremum = std::numeric_limits<double>::quiet_NaN());

/// Root of fitness `root_fitness` with two children of probability 1/2, each
/// heading a deterministic ray. Ray nodes at depth t >= 1 have fitness
/// a(t) or b(t) and carry the ray_a or ray_b tag.
ZooModel two_ray(FitnessSequence a, FitnessSequence b, double root_fitness = 1.0);

/// Single ray (0 < low <= high) with fitness `low` in even-indexed blocks and `high` in odd
/// ones; block k has `block_length(k)` generations.
ZooModel oscillating_block_ray(double low, double high, BlockLength block_length);
/// block_length(k) = ratio^k.
BlockLength geometric_blocks(std::uint64_t ratio);
/// block_length(k) = 2^(2^k); overflows past k = 5.
BlockLength doubly_exponential_blocks();

struct BlockBoundary {
  std::uint64_t time = 0;          // T_k, generations elapsed at the end of block k
  std::uint64_t high_steps = 0;    // how many of them had fitness `high`
  double geometric_mean = 0.0;     // exact (low^{T-h} high^h)^{1/T}
};
/// Block ends up to and including `horizon`, from partial sums of lengths.
std::vector<BlockBoundary> block_boundaries(double low, double high, const BlockLength& block_length,
                                            std::uint64_t horizon);

/// Two children of probability 1/2; node b_1..b_t has fitness
/// 1 + sum_j (2 b_j - 1) 2^{-j}.
ZooModel binary_dyadic();
/// f_n + 2^{-depth}, the supremum of the node's descendant fitnesses.
double binary_closed_form_exponent(const tree::Path& node);
double binary_fitness(const tree::Path& node);

/// Spine of fitness 1 that sends eta onward and 1 - eta to a burst head of
/// fitness 0 (even depth) or b (odd depth); bursts send eta to a same-fitness
/// child and 1 - eta to a fitness-0 leaf.
ZooModel burst_spine(double eta, double b);

/// Adds to each fitness-positive node a locked child (probability exactly
/// eta, deterministic ray of the node's fitness) and scales the original
/// children by 1 - eta. Nodes the inner model already tags as locked are left
/// as they are.
ZooModel lock(const ZooModel& inner, double eta);

/// Spine v_1, v_2, ... with fitness n/(n+1); v_n sends eta to a locked ray
/// of its fitness and 1 - eta to v_{n+1}. f* = 1 is never attained.
ZooModel nonattained_spine(double eta);

/// Spine with fitness growth(t) at depth t sending eta to a locked ray,
/// epsilon to the next spine node and the rest to a fitness-0 leaf.
ZooModel unbounded_spine(double eta, double epsilon, FitnessSequence growth);

/// Product space with product kernel and additive fitness f_C + f_D.
/// Children are enumerated lexicographically in (c-child, d-child).
ZooModel tensor_product(const ZooModel& c, const ZooModel& d);

/// Closed-form limits for burst_spine.
struct BurstSpineLimits {
  double ratio_limit;   // R = (1 - eta) / ((1 - b^2) eta)
  double mean_odd;      // limit of <f(t)> over odd t
  double mean_even;     // limit of <f(t)> over even t
};
BurstSpineLimits burst_spine_limits(double eta, double b);

}  // namespace evotree::zoo
