// evotree: command-line front end for the finite, tree and gaussian engines.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "evotree/acceptance.hpp"
#include "evotree/errors.hpp"
#include "evotree/experiment.hpp"
#include "evotree/export.hpp"
#include "json.hpp"

using evotree::Error;
using evotree::ErrorCode;
using evotree::experiment::Engine;
using evotree::experiment::ExperimentConfig;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> prune;
};

ExperimentConfig load_config(const Globals& g, Engine expected) {
  if (g.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
  auto cfg = ExperimentConfig::load(g.config);
  if (cfg.engine != expected) throw Error(ErrorCode::ConfigError, "field 'engine': does not match the subcommand");
  if (g.seed) cfg.seed = *g.seed;
  if (g.prune) {
    if (*g.prune < 0.0 || *g.prune >= 1.0) throw Error(ErrorCode::ConfigError, "--prune must lie in [0, 1)");
    cfg.prune_threshold = *g.prune;
  }
  return cfg;
}

std::vector<json> parse_values(const std::string& list, const std::string& list_json) {
  std::vector<json> values;
  if (!list_json.empty()) {
    json doc;
    try {
      doc = json::parse(list_json);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("--values-json: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::ConfigError, "--values-json must be a JSON array");
    for (auto& v : doc) values.push_back(v);
    return values;
  }
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      values.push_back(json::parse(item));
    } catch (const json::exception&) {
      values.push_back(item);
    }
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary dynamics on finite genotype spaces and infinite program trees"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--out", g.out, "Directory for output artifacts");
  app.add_option("--seed", g.seed, "Seed for the particle oracle");
  app.add_option("--prune", g.prune, "Prune threshold override");

  auto* finite_cmd = app.add_subcommand("finite", "Finite selection-mutation model");
  auto* finite_run = finite_cmd->add_subcommand("run", "Run a finite experiment");
  finite_cmd->require_subcommand(1);

  auto* tree_cmd = app.add_subcommand("tree", "Tree model");
  auto* tree_run = tree_cmd->add_subcommand("run", "Run a tree experiment");
  tree_cmd->require_subcommand(1);

  auto* gauss = app.add_subcommand("gaussian", "Gaussian peak closed forms");
  double f0 = 1.0, s2 = 1.0, sigma2 = 1.0, half_width = 10.0;
  int dimension = 1;
  std::size_t grid_points = 2001;
  bool discretize = false;
  gauss->add_option("--f0", f0, "Peak height");
  gauss->add_option("--s2", s2, "Landscape variance");
  gauss->add_option("--sigma2", sigma2, "Mutation variance");
  gauss->add_option("--dimension", dimension, "Dimension");
  gauss->add_flag("--discretize", discretize, "Also compute the discretized eigenvalue (d = 1)");
  gauss->add_option("--half-width", half_width, "Discretization half-width");
  gauss->add_option("--grid-points", grid_points, "Discretization grid points (odd)");

  auto* lineage = app.add_subcommand("lineage", "Lineage sizes and exponent estimate from a node");
  std::string node;
  std::uint64_t lineage_steps = 100;
  std::size_t window = 0;
  lineage->add_option("--node", node, "Node path, e.g. 0.1.1 or 1*5 (empty is the root)");
  lineage->add_option("--steps", lineage_steps, "Horizon");
  lineage->add_option("--window", window, "Trailing window (default steps / 4)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per parameter value");
  std::string axis, values, values_json;
  unsigned threads = 0;
  sweep_cmd->add_option("--axis", axis, "Parameter path, e.g. b or params.inner.params.eta")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values");
  sweep_cmd->add_option("--values-json", values_json, "JSON array of values");
  sweep_cmd->add_option("--threads", threads, "Worker threads (default: hardware)");

  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  std::string fixture;
  std::vector<std::string> only;
  verify_cmd->add_option("--fixture", fixture, "Finite model JSON to validate");
  verify_cmd->add_option("--only", only, "Criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json report;
    if (finite_run->parsed()) {
      report = evotree::experiment::run_experiment(load_config(g, Engine::Finite), g.out);
    } else if (tree_run->parsed()) {
      report = evotree::experiment::run_experiment(load_config(g, Engine::Tree), g.out);
    } else if (gauss->parsed()) {
      ExperimentConfig cfg;
      if (!g.config.empty()) {
        cfg = load_config(g, Engine::Gaussian);
      } else {
        cfg.engine = Engine::Gaussian;
        cfg.model = "peak";
        cfg.params = {{"peak_height", f0},         {"landscape_variance", s2}, {"mutation_variance", sigma2},
                      {"dimension", dimension},    {"discretize", discretize}, {"half_width", half_width},
                      {"grid_points", grid_points}};
      }
      report = evotree::experiment::run_experiment(cfg, g.out);
    } else if (lineage->parsed()) {
      report = evotree::experiment::run_lineage(load_config(g, Engine::Tree), node, lineage_steps, window);
    } else if (sweep_cmd->parsed()) {
      if (g.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
      auto cfg = ExperimentConfig::load(g.config);
      if (g.seed) cfg.seed = *g.seed;
      if (g.prune) cfg.prune_threshold = *g.prune;
      report = evotree::experiment::sweep(cfg, axis, parse_values(values, values_json), threads);
      if (!g.out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(g.out, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + g.out + ": " + ec.message());
        evotree::io::write_file((std::filesystem::path(g.out) / "sweep.json").string(), report.dump(2) + "\n");
      }
    } else if (verify_cmd->parsed()) {
      evotree::acceptance::VerifyOptions opts{fixture, only};
      bool all = true;
      evotree::acceptance::verify(opts, [&](const evotree::acceptance::CriterionResult& r) {
        std::cout << evotree::acceptance::format_line(r) << std::endl;
        all = all && r.pass;
      });
      return all ? 0 : evotree::experiment::kExitVerifyFailed;
    }
    std::cout << report.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "evotree: " << e.what() << "\n";
    return evotree::experiment::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "evotree: " << e.what() << "\n";
    return 3;
  }
}
