#pragma once
// Analyses over tree-engine runs: eta-preservation, takeover / extinction /
// survival verdicts from exponent estimates, concentration of fitness,
// expected utility, and the capability / deception split on tensor models.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evotree/tree.hpp"

namespace evotree::analysis {

struct PreservationResult {
  bool holds = true;
  std::optional<tree::NodeRef> witness;
  // Probability mass of no-worse children at the witness.
  double witness_mass = 0.0;
  std::size_t visited = 0;
  // False when the node cap stopped the enumeration (FrontierExplosion); the
  // verdict then only covers the visited nodes.
  bool complete = true;
};

/// Checks sum_{children m: f_m >= f_n} Q_mn >= eta at every fitness-positive
/// node reachable within `depth_limit` levels.
PreservationResult eta_preservation_check(const tree::TreeModel& model, std::uint64_t depth_limit,
                                          double eta, std::size_t max_nodes = 2'000'000);

enum class Verdict { TakesOver, DiesOut, Survives, Inconclusive };
std::string_view verdict_name(Verdict v);

struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  tree::ExponentEstimate s;
  tree::ExponentEstimate t;
};

/// Verdict for trait S against its complement T:
///   takes_over   lower(S) > upper(T) + margin
///   survives     upper(S) > upper(T) + margin
///   dies_out     upper(S) < lower(T) - margin
///   inconclusive otherwise
Classification classify_partition(const tree::ExponentEstimate& s, const tree::ExponentEstimate& t,
                                  double margin = 0.01);

/// Share of x(t) on nodes with |f - f_star| < epsilon.
double concentration_mass(const tree::Frontier& frontier, double f_star, double epsilon);

struct UtilityProfile {
  std::string name;
  std::function<double(double)> conditional_mean;  // mu(f); may return -inf
  bool bounded = false;
  double bound = 0.0;  // |mu| <= bound when `bounded`
  bool continuous_on_reachable = false;
};

UtilityProfile identity_utility();
UtilityProfile square_utility();
UtilityProfile log_utility();
UtilityProfile constant_utility(double c);
/// "identity", "square", "log", "constant:<c>". Throws Error{ConfigError}.
UtilityProfile utility_from_name(const std::string& name);

/// False if a declared bound is violated at any of the sampled fitness values.
bool spot_check_bound(const UtilityProfile& profile, const std::vector<double>& fitness_samples);

struct ExpectedUtility {
  double value = 0.0;  // -inf when any positive-share node has mu = -inf
  bool minus_infinity = false;
  double catastrophic_share = 0.0;
};

ExpectedUtility expected_utility(const tree::Frontier& frontier, const UtilityProfile& utility);

struct CoordinateMeans {
  double mean_c = 0.0;
  double mean_d = 0.0;
};

/// Share-weighted means of the f_C and f_D labels.
/// Throws Error{MissingCoordinateLabels}.
CoordinateMeans coordinate_means(const tree::Frontier& frontier, const tree::TreeModel& model);

struct FloorCheck {
  double floor_estimate = 0.0;
  bool passes = false;
};

/// Minimum running geometric mean over the trailing `tail_fraction` of the
/// records, compared against eta * f_star - tolerance.
FloorCheck geometric_mean_floor_check(const tree::Trajectory& trajectory, double eta, double f_star,
                                      double tail_fraction, double tolerance = 1e-3);

/// Minimum share of trait `trait_index` over the trailing `tail_fraction`; a
/// finite-horizon diagnostic for "prospers".
double min_trailing_share(const tree::Trajectory& trajectory, std::size_t trait_index, double tail_fraction);

}  // namespace evotree::analysis
