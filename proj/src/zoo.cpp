#include "evotree/zoo.hpp"

#include <cmath>
#include <limits>

#include "evotree/errors.hpp"

namespace evotree::zoo {

using tree::Child;
using tree::Labels;
using tree::NodeState;
using tree::Path;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t as_count(double slot) { return static_cast<std::uint64_t>(slot); }

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw Error(ErrorCode::ParameterRange, std::string(what) + " must lie in (0, 1)");
  }
}

std::optional<double> declared(double sup) {
  return std::isnan(sup) ? std::nullopt : std::optional<double>(sup);
}

// slot 0: depth
class SingleRay final : public tree::TreeModel {
 public:
  SingleRay(FitnessSequence f, double sup) : f_(std::move(f)), sup_(sup) {}
  NodeState root() const override { return {}; }
  double fitness(const NodeState& n) const override { return f_(as_count(n.slot[0])); }
  void children(const NodeState& n, std::vector<Child>& out) const override {
    if (!(fitness(n) > 0.0)) return;
    NodeState next = n;
    next.slot[0] += 1.0;
    out.push_back({0, 1.0, next});
  }
  Labels labels(const NodeState&) const override { return {}; }
  std::size_t state_width() const override { return 1; }
  std::optional<double> fitness_supremum() const override { return declared(sup_); }

 private:
  FitnessSequence f_;
  double sup_;
};

// slot 0: depth, slot 1: 0 root / 1 ray a / 2 ray b
class TwoRay final : public tree::TreeModel {
 public:
  TwoRay(FitnessSequence a, FitnessSequence b, double root_fitness)
      : a_(std::move(a)), b_(std::move(b)), root_fitness_(root_fitness) {}
  NodeState root() const override { return {}; }
  double fitness(const NodeState& n) const override {
    const auto depth = as_count(n.slot[0]);
    switch (static_cast<int>(n.slot[1])) {
      case 1: return a_(depth);
      case 2: return b_(depth);
      default: return root_fitness_;
    }
  }
  void children(const NodeState& n, std::vector<Child>& out) const override {
    if (!(fitness(n) > 0.0)) return;
    NodeState next = n;
    next.slot[0] += 1.0;
    if (n.slot[1] == 0.0) {
      next.slot[1] = 1.0;
      out.push_back({0, 0.5, next});
      next.slot[1] = 2.0;
      out.push_back({1, 0.5, next});
    } else {
      out.push_back({0, 1.0, next});
    }
  }
  Labels labels(const NodeState& n) const override {
    Labels l;
    if (n.slot[1] == 1.0) l.tags = tree::kTagRayA;
    if (n.slot[1] == 2.0) l.tags = tree::kTagRayB;
    return l;
  }
  std::size_t state_width() const override { return 2; }

 private:
  FitnessSequence a_, b_;
  double root_fitness_;
};

// slot 0: depth, slot 1: fitness
class BinaryDyadic final : public tree::TreeModel {
 public:
  NodeState root() const override {
    NodeState s;
    s.slot[1] = 1.0;
    return s;
  }
  double fitness(const NodeState& n) const override { return n.slot[1]; }
  void children(const NodeState& n, std::vector<Child>& out) const override {
    const double step = std::ldexp(1.0, -static_cast<int>(n.slot[0]) - 1);
    NodeState lo = n, hi = n;
    lo.slot[0] += 1.0;
    hi.slot[0] += 1.0;
    lo.slot[1] -= step;
    hi.slot[1] += step;
    out.push_back({0, 0.5, lo});
    out.push_back({1, 0.5, hi});
  }
  Labels labels(const NodeState&) const override { return {}; }
  std::size_t state_width() const override { return 2; }
  std::optional<double> fitness_supremum() const override { return 2.0; }
};

// slot 0: kind (0 spine, 1 burst, 2 dead), slot 1: depth, slot 2: burst fitness
class BurstSpine final : public tree::TreeModel {
 public:
  BurstSpine(double eta, double b) : eta_(eta), b_(b) {}
  NodeState root() const override { return {}; }
  double fitness(const NodeState& n) const override {
    switch (static_cast<int>(n.slot[0])) {
      case 0: return 1.0;
      case 1: return n.slot[2];
      default: return 0.0;
    }
  }
  void children(const NodeState& n, std::vector<Child>& out) const override {
    const int kind = static_cast<int>(n.slot[0]);
    const double depth = n.slot[1];
    if (kind == 0) {
      const bool odd = as_count(depth) % 2 == 1;
      out.push_back({0, eta_, NodeState{{0.0, depth + 1.0, 0.0}}});
      out.push_back({1, 1.0 - eta_, NodeState{{1.0, depth + 1.0, odd ? b_ : 0.0}}});
    } else if (kind == 1 && n.slot[2] > 0.0) {
      out.push_back({0, eta_, NodeState{{1.0, depth + 1.0, n.slot[2]}}});
      out.push_back({1, 1.0 - eta_, NodeState{{2.0, depth + 1.0, 0.0}}});
    }
  }
  Labels labels(const NodeState& n) const override {
    switch (static_cast<int>(n.slot[0])) {
      case 0: return {tree::kTagSpine, {}, {}};
      case 1: return {tree::kTagBurst, {}, {}};
      default: return {tree::kTagDead, {}, {}};
    }
  }
  std::size_t state_width() const override { return 3; }
  std::optional<double> fitness_supremum() const override { return 1.0; }

 private:
  double eta_, b_;
};

// inner slots [0, w), slot w: 1 on a locked ray
class Locked final : public tree::TreeModel {
 public:
  Locked(tree::ModelPtr inner, double eta) : inner_(std::move(inner)), eta_(eta), flag_(inner_->state_width()) {
    if (flag_ + 1 > tree::kStateSlots) throw Error(ErrorCode::ParameterRange, "model state too wide to lock");
  }
  NodeState root() const override { return inner_->root(); }
  double fitness(const NodeState& n) const override { return inner_->fitness(n); }
  void children(const NodeState& n, std::vector<Child>& out) const override {
    if (n.slot[flag_] != 0.0) {
      out.push_back({0, 1.0, n});
      return;
    }
    const std::size_t first = out.size();
    inner_->children(n, out);
    if (!(inner_->fitness(n) > 0.0) || inner_->labels(n).has(tree::kTagLocked)) return;
    std::uint32_t next_index = 0;
    for (std::size_t i = first; i < out.size(); ++i) {
      out[i].probability *= 1.0 - eta_;
      next_index = std::max(next_index, out[i].index + 1);
    }
    NodeState head = n;
    head.slot[flag_] = 1.0;
    out.push_back({next_index, eta_, head});
  }
  Labels labels(const NodeState& n) const override {
    Labels l = inner_->labels(n);
    if (n.slot[flag_] != 0.0) l.tags = tree::kTagLocked;
    return l;
  }
  std::size_t state_width() const override { return flag_ + 1; }
  std::optional<double> fitness_supremum() const override { return inner_->fitness_supremum(); }

 private:
  tree::ModelPtr inner_;
  double eta_;
  std::size_t flag_;
};

// slot 0: n >= 1, slot 1: locked flag
class NonattainedSpine final : public tree::TreeModel {
 public:
  explicit NonattainedSpine(double eta) : eta_(eta) {}
  NodeState root() const override { return NodeState{{1.0, 0.0}}; }
  double fitness(const NodeState& s) const override { return s.slot[0] / (s.slot[0] + 1.0); }
  void children(const NodeState& s, std::vector<Child>& out) const override {
    if (s.slot[1] != 0.0) {
      out.push_back({0, 1.0, s});
      return;
    }
    out.push_back({0, eta_, NodeState{{s.slot[0], 1.0}}});
    out.push_back({1, 1.0 - eta_, NodeState{{s.slot[0] + 1.0, 0.0}}});
  }
  Labels labels(const NodeState& s) const override {
    return {s.slot[1] != 0.0 ? tree::kTagLocked : tree::kTagSpine, {}, {}};
  }
  std::size_t state_width() const override { return 2; }
  std::optional<double> fitness_supremum() const override { return 1.0; }

 private:
  double eta_;
};

// slot 0: kind (0 spine, 1 locked, 2 zero-fitness leaf), slot 1: spine depth
class UnboundedSpine final : public tree::TreeModel {
 public:
  UnboundedSpine(double eta, double epsilon, FitnessSequence growth)
      : eta_(eta), epsilon_(epsilon), growth_(std::move(growth)) {}
  NodeState root() const override { return {}; }
  double fitness(const NodeState& s) const override {
    return s.slot[0] == 2.0 ? 0.0 : growth_(as_count(s.slot[1]));
  }
  void children(const NodeState& s, std::vector<Child>& out) const override {
    const int kind = static_cast<int>(s.slot[0]);
    if (kind == 1) {
      out.push_back({0, 1.0, s});
    } else if (kind == 0) {
      out.push_back({0, eta_, NodeState{{1.0, s.slot[1]}}});
      out.push_back({1, epsilon_, NodeState{{0.0, s.slot[1] + 1.0}}});
      out.push_back({2, 1.0 - eta_ - epsilon_, NodeState{{2.0, s.slot[1] + 1.0}}});
    }
  }
  Labels labels(const NodeState& s) const override {
    switch (static_cast<int>(s.slot[0])) {
      case 0: return {tree::kTagSpine, {}, {}};
      case 1: return {tree::kTagLocked, {}, {}};
      default: return {tree::kTagDead, {}, {}};
    }
  }
  std::size_t state_width() const override { return 2; }
  std::optional<double> fitness_supremum() const override { return kInf; }

 private:
  double eta_, epsilon_;
  FitnessSequence growth_;
};

// C slots [0, wc), D slots [wc, wc + wd)
class Tensor final : public tree::TreeModel {
 public:
  Tensor(tree::ModelPtr c, tree::ModelPtr d) : c_(std::move(c)), d_(std::move(d)), wc_(c_->state_width()) {
    if (wc_ + d_->state_width() > tree::kStateSlots) {
      throw Error(ErrorCode::ParameterRange, "tensor product state too wide");
    }
  }
  NodeState root() const override { return join(c_->root(), d_->root()); }
  double fitness(const NodeState& s) const override { return c_->fitness(s) + d_->fitness(split_d(s)); }
  void children(const NodeState& s, std::vector<Child>& out) const override {
    if (!(fitness(s) > 0.0)) return;
    const NodeState d_state = split_d(s);
    thread_local std::vector<Child> kc, kd;
    kc.clear();
    kd.clear();
    c_->children(s, kc);
    d_->children(d_state, kd);
    // A coordinate without offspring stays where it is.
    if (kc.empty()) kc.push_back({0, 1.0, s});
    if (kd.empty()) kd.push_back({0, 1.0, d_state});
    std::uint32_t index = 0;
    for (const auto& a : kc) {
      for (const auto& b : kd) {
        out.push_back({index++, a.probability * b.probability, join(a.state, b.state)});
      }
    }
  }
  Labels labels(const NodeState& s) const override {
    const Labels lc = c_->labels(s);
    const Labels ld = d_->labels(split_d(s));
    Labels l;
    l.tags = lc.tags & ld.tags;
    l.f_c = c_->fitness(s);
    l.f_d = d_->fitness(split_d(s));
    return l;
  }
  std::size_t state_width() const override { return wc_ + d_->state_width(); }
  std::optional<double> fitness_supremum() const override {
    auto a = c_->fitness_supremum();
    auto b = d_->fitness_supremum();
    if (!a || !b) return std::nullopt;
    return *a + *b;
  }

 private:
  NodeState join(const NodeState& c, const NodeState& d) const {
    NodeState s = c;
    for (std::size_t i = 0; i < d_->state_width(); ++i) s.slot[wc_ + i] = d.slot[i];
    for (std::size_t i = wc_ + d_->state_width(); i < tree::kStateSlots; ++i) s.slot[i] = 0.0;
    return s;
  }
  NodeState split_d(const NodeState& s) const {
    NodeState d;
    for (std::size_t i = 0; i < d_->state_width(); ++i) d.slot[i] = s.slot[wc_ + i];
    return d;
  }

  tree::ModelPtr c_, d_;
  std::size_t wc_;
};

}  // namespace

ZooModel single_ray(FitnessSequence fitness, std::string name, double supremum) {
  ZooModel z;
  z.model = std::make_shared<SingleRay>(std::move(fitness), supremum);
  z.name = std::move(name);
  z.fitness_supremum = supremum;
  return z;
}

ZooModel two_ray(FitnessSequence a, FitnessSequence b, double root_fitness) {
  if (!(root_fitness > 0.0)) throw Error(ErrorCode::ParameterRange, "root_fitness must be > 0");
  ZooModel z;
  z.model = std::make_shared<TwoRay>(std::move(a), std::move(b), root_fitness);
  z.name = "two_ray";
  z.parameters["root_fitness"] = root_fitness;
  return z;
}

BlockLength geometric_blocks(std::uint64_t ratio) {
  return [ratio](std::uint64_t k) {
    std::uint64_t len = 1;
    for (std::uint64_t i = 0; i < k; ++i) len *= ratio;
    return len;
  };
}

BlockLength doubly_exponential_blocks() {
  return [](std::uint64_t k) -> std::uint64_t {
    if (k >= 6) throw Error(ErrorCode::ParameterRange, "2^(2^k) block length overflows for k >= 6");
    return std::uint64_t{1} << (std::uint64_t{1} << k);
  };
}

ZooModel oscillating_block_ray(double low, double high, BlockLength block_length) {
  if (!(low > 0.0 && low <= high)) throw Error(ErrorCode::ParameterRange, "need 0 < low <= high");
  auto fitness = [low, high, block_length](std::uint64_t depth) {
    std::uint64_t end = 0;
    for (std::uint64_t k = 0;; ++k) {
      end += block_length(k);
      if (depth < end) return k % 2 == 0 ? low : high;
    }
  };
  ZooModel z = single_ray(fitness, "oscillating_block_ray", high);
  z.parameters["low"] = low;
  z.parameters["high"] = high;
  return z;
}

std::vector<BlockBoundary> block_boundaries(double low, double high, const BlockLength& block_length,
                                            std::uint64_t horizon) {
  std::vector<BlockBoundary> out;
  std::uint64_t time = 0;
  std::uint64_t high_steps = 0;
  for (std::uint64_t k = 0;; ++k) {
    const std::uint64_t len = block_length(k);
    if (time + len > horizon) break;
    time += len;
    if (k % 2 == 1) high_steps += len;
    const double t = static_cast<double>(time);
    const double h = static_cast<double>(high_steps);
    const double log_gm = ((t - h) * std::log(low) + h * std::log(high)) / t;
    out.push_back({time, high_steps, std::exp(log_gm)});
  }
  return out;
}

ZooModel binary_dyadic() {
  ZooModel z;
  z.model = std::make_shared<BinaryDyadic>();
  z.name = "binary_dyadic";
  z.fitness_supremum = 2.0;
  z.references["root_fitness"] = {1.0, "f_o = 1"};
  z.references["root_exponent"] = {2.0, "g_o = f_o + 2^0"};
  return z;
}

double binary_fitness(const Path& node) {
  double f = 1.0;
  int j = 1;
  for (auto b : node.indices()) {
    f += (2.0 * static_cast<double>(b) - 1.0) * std::ldexp(1.0, -j);
    ++j;
  }
  return f;
}

double binary_closed_form_exponent(const Path& node) {
  return binary_fitness(node) + std::ldexp(1.0, -static_cast<int>(node.depth()));
}

BurstSpineLimits burst_spine_limits(double eta, double b) {
  const double r = (1.0 - eta) / ((1.0 - b * b) * eta);
  const double odd = (1.0 + b * b * r) / (1.0 + b * r + (1.0 - eta) * (1.0 + b * r) / eta);
  const double even = (1.0 + b * r) / (1.0 + r + (1.0 - eta) * b * b * r / eta);
  return {r, odd, even};
}

ZooModel burst_spine(double eta, double b) {
  require_open_unit(eta, "eta");
  require_open_unit(b, "b");
  ZooModel z;
  z.model = std::make_shared<BurstSpine>(eta, b);
  z.name = "burst_spine";
  z.parameters = {{"eta", eta}, {"b", b}};
  z.fitness_supremum = 1.0;
  const auto lim = burst_spine_limits(eta, b);
  z.references["R"] = {lim.ratio_limit, "(1 - eta) / ((1 - b^2) eta)"};
  z.references["mean_odd"] = {lim.mean_odd, "(1 + b^2 R) / (1 + b R + (1 - eta)(1 + b R)/eta)"};
  z.references["mean_even"] = {lim.mean_even, "(1 + b R) / (1 + R + (1 - eta) b^2 R / eta)"};
  z.references["geometric_mean"] = {std::sqrt(lim.mean_odd * lim.mean_even), "sqrt(mean_odd mean_even)"};
  return z;
}

ZooModel lock(const ZooModel& inner, double eta) {
  require_open_unit(eta, "eta");
  ZooModel z;
  z.model = std::make_shared<Locked>(inner.model, eta);
  z.name = "lock(" + inner.name + ")";
  z.parameters = inner.parameters;
  z.parameters["lock_eta"] = eta;
  z.references = inner.references;
  z.fitness_supremum = inner.fitness_supremum;
  return z;
}

ZooModel nonattained_spine(double eta) {
  require_open_unit(eta, "eta");
  ZooModel z;
  z.model = std::make_shared<NonattainedSpine>(eta);
  z.name = "nonattained_spine";
  z.parameters["eta"] = eta;
  z.fitness_supremum = 1.0;
  z.references["f_star"] = {1.0, "sup_n n/(n+1)"};
  z.references["first_spine_fitness"] = {0.5, "1/(1+1)"};
  return z;
}

ZooModel unbounded_spine(double eta, double epsilon, FitnessSequence growth) {
  require_open_unit(eta, "eta");
  if (!(epsilon > 0.0 && eta + epsilon < 1.0)) {
    throw Error(ErrorCode::ParameterRange, "epsilon must lie in (0, 1 - eta)");
  }
  ZooModel z;
  z.model = std::make_shared<UnboundedSpine>(eta, epsilon, std::move(growth));
  z.name = "unbounded_spine";
  z.parameters = {{"eta", eta}, {"epsilon", epsilon}};
  z.fitness_supremum = kInf;
  return z;
}

ZooModel tensor_product(const ZooModel& c, const ZooModel& d) {
  ZooModel z;
  z.model = std::make_shared<Tensor>(c.model, d.model);
  z.name = "tensor(" + c.name + ", " + d.name + ")";
  for (const auto& [k, v] : c.parameters) z.parameters["c." + k] = v;
  for (const auto& [k, v] : d.parameters) z.parameters["d." + k] = v;
  z.fitness_supremum = c.fitness_supremum + d.fitness_supremum;
  z.references["f_star"] = {z.fitness_supremum, "f_C* + f_D*"};
  return z;
}

}  // namespace evotree::zoo
