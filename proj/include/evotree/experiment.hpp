#pragma once
// Config-driven runs of the three engines, parameter sweeps and lineage
// exponent estimation. Configs are JSON; unknown fields are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evotree/errors.hpp"
#include "json.hpp"

namespace evotree::experiment {

enum class Engine { Finite, Tree, Gaussian };

struct Outputs {
  std::string trajectory_csv;
  std::string report_json;
  std::string frontier_json;
};

/// Tree engine: model is a zoo name, params its parameter object.
/// Finite engine: model "inline" with params {fitness, mutation[, initial]} or
/// "file" with params {path[, initial]}.
/// Gaussian engine: model "peak" with params {peak_height, landscape_variance,
/// mutation_variance, dimension, discretize, half_width, grid_points} or
/// "compare" with params {a, b} (two peak objects).
struct ExperimentConfig {
  Engine engine = Engine::Tree;
  std::string model;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t steps = 0;
  double prune_threshold = 0.0;
  std::vector<std::string> traits;
  std::vector<std::string> analyses;
  // eta, f_star, epsilon, tail_fraction, window, depth_limit, margin, particles
  nlohmann::json analysis_params = nlohmann::json::object();
  Outputs outputs;
  std::uint64_t seed = 0;

  /// Throws Error{ConfigError} naming the offending field.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

/// 0 success, 1 verification failure, 2 ConfigError, 3 model or numerical
/// errors, 4 IoError.
int exit_code(ErrorCode code);
inline constexpr int kExitVerifyFailed = 1;

/// Runs the experiment, writes the configured artifacts (relative paths are
/// resolved against `out_dir` when it is non-empty, and an empty output set
/// with a non-empty `out_dir` writes the default file names there) and
/// returns the report.
nlohmann::json run_experiment(const ExperimentConfig& config, const std::string& out_dir = "");

/// One run per value of `axis` (a dotted path into the config document;
/// a name that is not a top-level field refers to params). Errors are
/// reported per row. Rows follow the order of `values`.
nlohmann::json sweep(const ExperimentConfig& config_template, const std::string& axis,
                     const std::vector<nlohmann::json>& values, unsigned threads = 0);

/// log Z_n(s), s = 0..steps, for the tree node at `node_path`, plus the
/// trailing-window exponent estimate (window 0 means steps / 4).
nlohmann::json run_lineage(const ExperimentConfig& config, const std::string& node_path, std::uint64_t steps,
                           std::size_t window = 0);

}  // namespace evotree::experiment
