#include "evotree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evotree/errors.hpp"
#include "evotree/kernels.hpp"

namespace evotree::analysis {

PreservationResult eta_preservation_check(const tree::TreeModel& model, std::uint64_t depth_limit,
                                          double eta, std::size_t max_nodes) {
  if (depth_limit < 1) throw Error(ErrorCode::ParameterRange, "depth_limit must be >= 1");
  PreservationResult result;
  std::vector<tree::Child> kids;
  const bool finished = tree::visit_reachable(
      model, depth_limit, max_nodes, [&](const tree::NodeRef& node, double fitness) {
        ++result.visited;
        if (!(fitness > 0.0)) return true;
        kids.clear();
        model.children(node.state, kids);
        double kept = 0.0;
        for (const auto& kid : kids) {
          if (model.fitness(kid.state) >= fitness) kept += kid.probability;
        }
        if (kept < eta - 1e-12) {
          result.holds = false;
          result.witness = node;
          result.witness_mass = kept;
          return false;
        }
        return true;
      });
  result.complete = finished || !result.holds;
  return result;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::TakesOver: return "takes_over";
    case Verdict::DiesOut: return "dies_out";
    case Verdict::Survives: return "survives";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Classification classify_partition(const tree::ExponentEstimate& s, const tree::ExponentEstimate& t,
                                  double margin) {
  Classification c{Verdict::Inconclusive, s, t};
  if (s.lower > t.upper + margin) {
    c.verdict = Verdict::TakesOver;
  } else if (s.upper > t.upper + margin) {
    c.verdict = Verdict::Survives;
  } else if (s.upper < t.lower - margin) {
    c.verdict = Verdict::DiesOut;
  }
  return c;
}

double concentration_mass(const tree::Frontier& frontier, double f_star, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::ParameterRange, "epsilon must be > 0");
  double mass = 0.0;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    if (std::fabs(frontier.fitness[i] - f_star) < epsilon) mass += frontier.shares[i];
  }
  return mass;
}

UtilityProfile identity_utility() { return {"identity", [](double f) { return f; }, false, 0.0, true}; }
UtilityProfile square_utility() { return {"square", [](double f) { return f * f; }, false, 0.0, true}; }
UtilityProfile log_utility() {
  return {"log",
          [](double f) { return f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity(); },
          false, 0.0, false};
}
UtilityProfile constant_utility(double c) {
  return {"constant:" + std::to_string(c), [c](double) { return c; }, true, std::fabs(c), true};
}

UtilityProfile utility_from_name(const std::string& name) {
  if (name == "identity") return identity_utility();
  if (name == "square") return square_utility();
  if (name == "log") return log_utility();
  if (name.rfind("constant:", 0) == 0) {
    try {
      return constant_utility(std::stod(name.substr(9)));
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown utility profile '" + name + "'");
}

bool spot_check_bound(const UtilityProfile& profile, const std::vector<double>& fitness_samples) {
  if (!profile.bounded) return true;
  return std::all_of(fitness_samples.begin(), fitness_samples.end(), [&](double f) {
    const double mu = profile.conditional_mean(f);
    return std::isfinite(mu) && std::fabs(mu) <= profile.bound;
  });
}

ExpectedUtility expected_utility(const tree::Frontier& frontier, const UtilityProfile& utility) {
  ExpectedUtility out;
  std::vector<double> mu(frontier.size(), 0.0);
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    if (!(frontier.shares[i] > 0.0)) continue;
    mu[i] = utility.conditional_mean(frontier.fitness[i]);
    if (mu[i] == -std::numeric_limits<double>::infinity()) {
      out.minus_infinity = true;
      out.catastrophic_share += frontier.shares[i];
    }
  }
  // Same reduction as mean_fitness, so the identity profile reproduces it bit for bit.
  out.value = out.minus_infinity ? -std::numeric_limits<double>::infinity() : kernels::dot(frontier.shares, mu);
  return out;
}

CoordinateMeans coordinate_means(const tree::Frontier& frontier, const tree::TreeModel& model) {
  CoordinateMeans m;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const tree::Labels labels = model.labels(frontier.states[i]);
    if (!labels.f_c || !labels.f_d) {
      throw Error(ErrorCode::MissingCoordinateLabels,
                  "node " + frontier.paths[i].to_string() + " has no f_C / f_D labels");
    }
    m.mean_c += frontier.shares[i] * *labels.f_c;
    m.mean_d += frontier.shares[i] * *labels.f_d;
  }
  return m;
}

namespace {

std::size_t tail_start(std::size_t n, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw Error(ErrorCode::ParameterRange, "tail_fraction must lie in (0, 1)");
  }
  const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tail_fraction * n)));
  return n - std::min(n, len);
}

}  // namespace

FloorCheck geometric_mean_floor_check(const tree::Trajectory& trajectory, double eta, double f_star,
                                      double tail_fraction, double tolerance) {
  if (trajectory.records.empty()) throw Error(ErrorCode::TooShort, "empty trajectory");
  const auto& r = trajectory.records;
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = tail_start(r.size(), tail_fraction); i < r.size(); ++i) {
    floor = std::min(floor, r[i].running_geometric_mean);
  }
  return {floor, floor >= eta * f_star - tolerance};
}

double min_trailing_share(const tree::Trajectory& trajectory, std::size_t trait_index, double tail_fraction) {
  const auto& r = trajectory.records;
  if (r.empty()) throw Error(ErrorCode::TooShort, "empty trajectory");
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = tail_start(r.size(), tail_fraction); i < r.size(); ++i) {
    lowest = std::min(lowest, r[i].trait_shares.at(trait_index));
  }
  return lowest;
}

}  // namespace evotree::analysis
