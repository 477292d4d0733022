#include "evotree/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "evotree/analysis.hpp"
#include "evotree/export.hpp"
#include "evotree/finite.hpp"
#include "evotree/gaussian.hpp"
#include "evotree/registry.hpp"
#include "evotree/tree.hpp"
#include "evotree/zoo.hpp"

namespace evotree::experiment {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Finite: return "finite";
    case Engine::Tree: return "tree";
    case Engine::Gaussian: return "gaussian";
  }
  return "tree";
}

std::vector<std::string> string_list(const json& doc, const std::string& field) {
  const auto& v = doc.at(field);
  if (!v.is_array()) config_error(field, "must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) config_error(field, "must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double aparam(const ExperimentConfig& cfg, const std::string& key, double fallback) {
  if (!cfg.analysis_params.contains(key)) return fallback;
  const auto& v = cfg.analysis_params.at(key);
  if (!v.is_number()) config_error("analysis_params." + key, "must be a number");
  return v.get<double>();
}

std::string resolve(const std::string& out_dir, const std::string& path) {
  if (path.empty() || out_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(out_dir) / path).string();
}

Outputs resolved_outputs(const ExperimentConfig& cfg, const std::string& out_dir) {
  Outputs o = cfg.outputs;
  if (!out_dir.empty() && o.trajectory_csv.empty() && o.report_json.empty() && o.frontier_json.empty()) {
    if (cfg.engine != Engine::Gaussian) o.trajectory_csv = "trajectory.csv";
    o.report_json = "report.json";
    if (cfg.engine == Engine::Tree) o.frontier_json = "frontier.json";
  }
  o.trajectory_csv = resolve(out_dir, o.trajectory_csv);
  o.report_json = resolve(out_dir, o.report_json);
  o.frontier_json = resolve(out_dir, o.frontier_json);
  for (const auto* p : {&o.trajectory_csv, &o.report_json, &o.frontier_json}) {
    if (p->empty()) continue;
    const fs::path parent = fs::path(*p).parent_path();
    if (parent.empty()) continue;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + parent.string() + ": " + ec.message());
  }
  return o;
}

// ---- finite ---------------------------------------------------------------

json run_finite(const ExperimentConfig& cfg, const Outputs& out) {
  if (!cfg.traits.empty()) config_error("traits", "not used by the finite engine");
  json params = cfg.params;
  std::optional<finite::FiniteModel> model;
  if (cfg.model == "inline") {
    for (const auto& [k, _] : params.items()) {
      if (k != "fitness" && k != "mutation" && k != "initial") config_error("params." + k, "unknown parameter");
    }
    model.emplace(finite::FiniteModel::from_json(params));
  } else if (cfg.model == "file") {
    for (const auto& [k, _] : params.items()) {
      if (k != "path" && k != "initial") config_error("params." + k, "unknown parameter");
    }
    if (!params.contains("path") || !params["path"].is_string()) config_error("params.path", "must be a string");
    model.emplace(finite::FiniteModel::load(params["path"].get<std::string>()));
  } else {
    config_error("model", "finite engine models are 'inline' or 'file'");
  }
  std::optional<finite::PopulationState> x0;
  if (params.contains("initial")) {
    try {
      x0.emplace(params["initial"].get<std::vector<double>>());
    } catch (const json::exception&) {
      config_error("params.initial", "must be an array of numbers");
    }
    if (x0->size() != model->size()) config_error("params.initial", "length differs from the model size");
  } else {
    x0.emplace(finite::PopulationState::uniform(model->size()));
  }

  const auto points = finite::evolve(*model, *x0, cfg.steps);
  json report = {{"engine", "finite"},
                 {"size", model->size()},
                 {"steps", cfg.steps},
                 {"final_time", points.size() - 1},
                 {"final_state", std::vector<double>(points.back().state.frequencies().begin(),
                                                     points.back().state.frequencies().end())},
                 {"final_mean_fitness", points.back().mean_fitness},
                 {"extinct", points.back().extinct}};
  json analyses = json::object();
  for (const auto& name : cfg.analyses) {
    if (name == "perron") {
      const auto r = finite::perron_eigenpair(*model);
      analyses["perron"] = {{"eigenvalue", r.eigenvalue},
                            {"right_vector", r.right_vector},
                            {"left_vector", r.left_vector},
                            {"iterations", r.iterations},
                            {"converged", r.converged},
                            {"residual", finite::eigen_residual(model->growth_rows(), r.right_vector, r.eigenvalue)}};
    } else if (name == "fisher") {
      const auto r = finite::fisher_delta(*model, *x0);
      analyses["fisher"] = {{"delta", r.delta}, {"var_over_mean", r.var_over_mean}};
    } else if (name == "price") {
      const auto r = finite::price_decomposition(*model, *x0, model->fitness());
      analyses["price"] = {{"trait", "fitness"}, {"selection", r.selection}, {"mutation", r.mutation}, {"total", r.total}};
    } else if (name == "symmetrized") {
      const auto b = finite::symmetrized_operator(*model);
      const auto rb = finite::power_iteration(b, {}, model->size(), {});
      analyses["symmetrized"] = {{"matrix", b}, {"eigenvalue", rb.eigenvalue}, {"converged", rb.converged}};
    } else {
      config_error("analyses", "unknown finite analysis '" + name + "'");
    }
  }
  report["analyses"] = analyses;

  if (!out.trajectory_csv.empty()) {
    std::ostringstream csv;
    io::write_finite_csv(csv, points);
    io::write_file(out.trajectory_csv, csv.str());
  }
  return report;
}

// ---- gaussian -------------------------------------------------------------

struct PeakSpec {
  gaussian::GaussianPeak peak;
  bool discretize = false;
  gaussian::DiscretizationOptions disc;
};

PeakSpec parse_peak(const json& p, const std::string& where) {
  if (!p.is_object()) config_error(where, "must be an object");
  static const std::set<std::string> allowed = {"peak_height", "landscape_variance", "mutation_variance",
                                                "dimension",   "discretize",         "half_width",
                                                "grid_points", "center"};
  for (const auto& [k, _] : p.items()) {
    if (!allowed.count(k)) config_error(where + "." + k, "unknown parameter");
  }
  PeakSpec s;
  try {
    s.peak.peak_height = p.value("peak_height", 1.0);
    s.peak.landscape_variance = p.value("landscape_variance", 1.0);
    s.peak.mutation_variance = p.value("mutation_variance", 1.0);
    s.peak.dimension = p.value("dimension", 1);
    s.peak.center = p.value("center", std::vector<double>{});
    s.discretize = p.value("discretize", false);
    s.disc.half_width = p.value("half_width", s.disc.half_width);
    s.disc.grid_points = p.value("grid_points", s.disc.grid_points);
  } catch (const json::exception& e) {
    config_error(where, std::string("bad value: ") + e.what());
  }
  s.peak.validate();
  return s;
}

json peak_report(const PeakSpec& s) {
  const auto eq = gaussian::equilibrium(s.peak);
  json r = {{"width", eq.width},
            {"eigenvalue", eq.eigenvalue},
            {"eigenvalue_nu_form", gaussian::peak_eigenvalue_nu_form(s.peak)},
            {"nu", s.peak.nu()}};
  if (s.discretize) {
    r["discretized_eigenvalue"] = gaussian::discretized_dominant_eigenvalue(s.peak, s.disc);
    r["half_width"] = s.disc.half_width;
    r["grid_points"] = s.disc.grid_points;
  }
  return r;
}

json run_gaussian(const ExperimentConfig& cfg) {
  if (!cfg.traits.empty()) config_error("traits", "not used by the gaussian engine");
  if (!cfg.analyses.empty()) config_error("analyses", "not used by the gaussian engine");
  json report = {{"engine", "gaussian"}};
  if (cfg.model == "peak" || cfg.model.empty()) {
    report.update(peak_report(parse_peak(cfg.params, "params")));
  } else if (cfg.model == "compare") {
    for (const auto& [k, _] : cfg.params.items()) {
      if (k != "a" && k != "b") config_error("params." + k, "unknown parameter");
    }
    if (!cfg.params.contains("a") || !cfg.params.contains("b")) config_error("params", "compare needs 'a' and 'b'");
    const auto a = parse_peak(cfg.params["a"], "params.a");
    const auto b = parse_peak(cfg.params["b"], "params.b");
    const auto cmp = gaussian::flattest_compare(a.peak, b.peak);
    report["a"] = peak_report(a);
    report["b"] = peak_report(b);
    report["winner"] = std::string(gaussian::winner_name(cmp.winner));
  } else {
    config_error("model", "gaussian engine models are 'peak' or 'compare'");
  }
  return report;
}

// ---- tree -----------------------------------------------------------------

json estimate_json(const tree::ExponentEstimate& e) {
  return {{"horizon", e.horizon},
          {"lower", number_or_null(e.lower)},
          {"upper", number_or_null(e.upper)},
          {"window", e.window},
          {"full_sequence_available", e.full_sequence_available}};
}

std::size_t window_for(const ExperimentConfig& cfg, std::size_t horizon) {
  const double w = aparam(cfg, "window", 0.0);
  if (w > 0.0) return static_cast<std::size_t>(w);
  return std::max<std::size_t>(1, horizon / 4);
}

std::optional<double> eta_for(const ExperimentConfig& cfg) {
  if (cfg.analysis_params.contains("eta")) return aparam(cfg, "eta", 0.0);
  if (cfg.params.is_object() && cfg.params.contains("eta") && cfg.params["eta"].is_number()) {
    return cfg.params["eta"].get<double>();
  }
  return std::nullopt;
}

void check_growth_horizon(const ExperimentConfig& cfg) {
  if (cfg.model != "unbounded_spine") return;
  const double base = cfg.params.value("base", 4.0);
  if (base > 1.0 && static_cast<double>(cfg.steps) * std::log10(base) > 300.0) {
    config_error("steps", "unbounded_spine fitness base^t would exceed 1e300 within the horizon");
  }
}

json run_tree_engine(const ExperimentConfig& cfg, const Outputs& out) {
  check_growth_horizon(cfg);
  const zoo::ZooModel zm = registry::make_model(cfg.model, cfg.params);
  const tree::TreeModel& model = *zm;

  std::vector<tree::TraitPredicate> traits;
  for (const auto& t : cfg.traits) traits.push_back(registry::make_trait(t));
  const std::size_t user_traits = traits.size();

  std::vector<std::string> classify;
  bool want_coordinates = false;
  std::optional<analysis::UtilityProfile> utility;
  for (const auto& a : cfg.analyses) {
    if (a.rfind("classify:", 0) == 0) {
      classify.push_back(a.substr(9));
      traits.push_back(registry::make_trait(a.substr(9)));
    } else if (a.rfind("utility:", 0) == 0) {
      utility = analysis::utility_from_name(a.substr(8));
    } else if (a == "coordinates") {
      want_coordinates = true;
    } else if (a != "exponents" && a != "preservation_check" && a != "geometric_floor" && a != "concentration" &&
               a != "particles") {
      config_error("analyses", "unknown tree analysis '" + a + "'");
    }
  }

  tree::AdvanceOptions opts;
  opts.prune_threshold = cfg.prune_threshold;
  opts.max_frontier = tree::max_frontier_from_env();

  std::vector<double> mean_c, mean_d;
  double max_additivity_error = 0.0;
  double running_max_fitness = 0.0;
  auto observe = [&](const tree::StepRecord& rec, const tree::Frontier& f) {
    for (double v : f.fitness) running_max_fitness = std::max(running_max_fitness, v);
    if (want_coordinates && !f.extinct) {
      const auto cm = analysis::coordinate_means(f, model);
      mean_c.push_back(cm.mean_c);
      mean_d.push_back(cm.mean_d);
      max_additivity_error = std::max(max_additivity_error, std::fabs(cm.mean_c + cm.mean_d - rec.mean_fitness));
    }
  };
  tree::Trajectory traj = tree::run_tree(model, cfg.steps, opts, traits, observe);
  for (double v : tree::root_frontier(model).fitness) running_max_fitness = std::max(running_max_fitness, v);

  json warnings = json::array();
  json report = {{"engine", "tree"},
                 {"model", zm.name},
                 {"params", cfg.params},
                 {"steps", cfg.steps},
                 {"prune_threshold", cfg.prune_threshold}};
  json refs = json::object();
  for (const auto& [k, r] : zm.references) refs[k] = {{"value", r.value}, {"formula", r.formula}};
  report["references"] = refs;
  report["fitness_supremum"] = std::isnan(zm.fitness_supremum)
                                   ? json(nullptr)
                                   : (std::isinf(zm.fitness_supremum) ? json("inf") : json(zm.fitness_supremum));

  const tree::Frontier& fin = traj.final_frontier;
  json final_rec = {{"time", fin.depth},
                    {"frontier_size", fin.size()},
                    {"mean_fitness", fin.extinct ? 0.0 : tree::mean_fitness(fin)},
                    {"log_total_mass", number_or_null(fin.log_total_mass)},
                    {"truncated_share_bound", fin.truncated_share_bound}};
  if (!traj.records.empty()) final_rec["running_geometric_mean"] = number_or_null(traj.records.back().running_geometric_mean);
  json shares = json::object();
  for (std::size_t k = 0; k < user_traits; ++k) {
    shares[traits[k].name] = traj.records.empty() ? tree::trait_share(fin, model, traits[k])
                                                  : traj.records.back().trait_shares[k];
  }
  final_rec["trait_shares"] = shares;
  report["final"] = final_rec;
  report["extinct_at"] = traj.extinct_at ? json(*traj.extinct_at) : json(nullptr);

  json tail = json::object();
  for (auto it = traj.records.rbegin(); it != traj.records.rend(); ++it) {
    const char* key = it->time % 2 == 1 ? "mean_odd" : "mean_even";
    if (!tail.contains(key)) tail[key] = it->mean_fitness;
    if (tail.size() == 2) break;
  }
  report["tail"] = tail;

  double f_star = zm.fitness_supremum;
  if (cfg.analysis_params.contains("f_star")) f_star = aparam(cfg, "f_star", 0.0);
  auto need_f_star = [&]() {
    if (std::isnan(f_star) || std::isinf(f_star)) {
      warnings.push_back("no finite declared f*; using the running maximum fitness");
      f_star = running_max_fitness;
    }
    return f_star;
  };

  std::vector<double> log_sizes{0.0};
  for (const auto& r : traj.records) log_sizes.push_back(r.log_total_mass);

  json analyses = json::object();
  for (const auto& a : cfg.analyses) {
    try {
      if (a == "exponents") {
        analyses["exponents"] = estimate_json(tree::exponent_estimate(log_sizes, window_for(cfg, cfg.steps)));
      } else if (a == "preservation_check") {
        const auto eta = eta_for(cfg);
        if (!eta) config_error("analysis_params.eta", "preservation_check needs eta");
        const auto depth = static_cast<std::uint64_t>(aparam(cfg, "depth_limit", 12.0));
        const auto r = analysis::eta_preservation_check(model, depth, *eta);
        json j = {{"holds", r.holds}, {"eta", *eta}, {"depth_limit", depth}, {"visited", r.visited}, {"complete", r.complete}};
        if (r.witness) {
          j["witness"] = r.witness->path.to_string();
          j["witness_mass"] = r.witness_mass;
        }
        analyses["preservation_check"] = j;
      } else if (a == "geometric_floor") {
        const auto eta = eta_for(cfg);
        if (!eta) config_error("analysis_params.eta", "geometric_floor needs eta");
        const double fs = need_f_star();
        const auto r = analysis::geometric_mean_floor_check(traj, *eta, fs, aparam(cfg, "tail_fraction", 0.25),
                                                            aparam(cfg, "tolerance", 1e-3));
        analyses["geometric_floor"] = {{"floor_estimate", r.floor_estimate}, {"passes", r.passes},
                                       {"target", *eta * fs}};
      } else if (a == "concentration") {
        const double fs = need_f_star();
        const double eps = aparam(cfg, "epsilon", 0.05);
        analyses["concentration"] = {{"f_star", fs}, {"epsilon", eps},
                                     {"mass", analysis::concentration_mass(fin, fs, eps)}};
      } else if (a.rfind("utility:", 0) == 0) {
        const auto r = analysis::expected_utility(fin, *utility);
        analyses[a] = {{"value", number_or_null(r.value)}, {"minus_infinity", r.minus_infinity},
                       {"catastrophic_share", r.catastrophic_share}};
      } else if (a == "coordinates") {
        analyses["coordinates"] = {{"mean_c", mean_c}, {"mean_d", mean_d},
                                   {"max_additivity_error", max_additivity_error}};
      } else if (a.rfind("classify:", 0) == 0) {
        const std::string name = a.substr(9);
        const auto idx = static_cast<std::size_t>(
            std::find(classify.begin(), classify.end(), name) - classify.begin()) + user_traits;
        std::vector<double> in_s{0.0}, in_t{0.0};
        const auto inf = std::numeric_limits<double>::infinity();
        for (const auto& r : traj.records) {
          const double pi = r.trait_shares[idx];
          in_s.push_back(pi > 0.0 ? r.log_total_mass + std::log(pi) : -inf);
          in_t.push_back(pi < 1.0 ? r.log_total_mass + std::log1p(-pi) : -inf);
        }
        const std::size_t w = window_for(cfg, cfg.steps);
        const auto c = analysis::classify_partition(tree::exponent_estimate(in_s, w), tree::exponent_estimate(in_t, w),
                                                    aparam(cfg, "margin", 0.01));
        analyses[a] = {{"verdict", std::string(analysis::verdict_name(c.verdict))},
                       {"trait", estimate_json(c.s)},
                       {"complement", estimate_json(c.t)},
                       {"min_trailing_share", analysis::min_trailing_share(traj, idx, 0.25)}};
      } else if (a == "particles") {
        const auto n = static_cast<std::size_t>(aparam(cfg, "particles", 10000.0));
        const auto est = tree::particle_oracle(model, n, cfg.steps, cfg.seed, {});
        double worst = std::fabs(est[0].mean_fitness - tree::mean_fitness(tree::root_frontier(model)));
        for (std::size_t t = 1; t < est.size() && t <= traj.records.size(); ++t) {
          worst = std::max(worst, std::fabs(est[t].mean_fitness - traj.records[t - 1].mean_fitness));
        }
        analyses["particles"] = {{"particles", n}, {"seed", cfg.seed}, {"max_abs_deviation", worst},
                                 {"tolerance", 5.0 / std::sqrt(static_cast<double>(n))}};
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      analyses[a] = {{"error", e.what()}};
    }
  }
  report["analyses"] = analyses;
  report["warnings"] = warnings;

  if (!out.trajectory_csv.empty()) {
    tree::Trajectory visible;
    visible.trait_names.assign(traj.trait_names.begin(), traj.trait_names.begin() + user_traits);
    visible.records = traj.records;
    for (auto& r : visible.records) r.trait_shares.resize(user_traits);
    std::ostringstream csv;
    io::write_trajectory_csv(csv, visible);
    io::write_file(out.trajectory_csv, csv.str());
  }
  if (!out.frontier_json.empty()) {
    io::write_file(out.frontier_json, io::frontier_json(fin, model).dump(1) + "\n");
  }
  return report;
}

json* locate(json& doc, const std::string& axis) {
  std::vector<std::string> parts;
  std::stringstream ss(axis);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.empty()) config_error("axis", "empty axis");
  static const std::set<std::string> top = {"engine", "model", "params", "steps", "prune_threshold", "traits",
                                            "analyses", "analysis_params", "outputs", "seed"};
  if (!top.count(parts.front())) parts.insert(parts.begin(), "params");
  json* cur = &doc;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!cur->is_object()) config_error("axis", "'" + axis + "' does not name a parameter");
    cur = &(*cur)[parts[i]];
  }
  return cur;
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return 2;
    case ErrorCode::IoError: return 4;
    default: return 3;
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::set<std::string> known = {"engine", "model", "params", "steps", "prune_threshold", "traits",
                                              "analyses", "analysis_params", "outputs", "seed"};
  for (const auto& [k, _] : doc.items()) {
    if (!known.count(k)) config_error(k, "unknown field");
  }
  ExperimentConfig c;
  if (!doc.contains("engine") || !doc["engine"].is_string()) config_error("engine", "required string");
  const std::string engine = doc["engine"].get<std::string>();
  if (engine == "finite") c.engine = Engine::Finite;
  else if (engine == "tree") c.engine = Engine::Tree;
  else if (engine == "gaussian") c.engine = Engine::Gaussian;
  else config_error("engine", "must be finite, tree or gaussian");

  if (doc.contains("model")) {
    if (!doc["model"].is_string()) config_error("model", "must be a string");
    c.model = doc["model"].get<std::string>();
  } else if (c.engine != Engine::Gaussian) {
    config_error("model", "required");
  }
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) config_error("params", "must be an object");
    c.params = doc["params"];
  }
  if (doc.contains("steps")) {
    const auto& s = doc["steps"];
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0) config_error("steps", "must be an integer >= 0");
    c.steps = s.get<std::uint64_t>();
  }
  if (doc.contains("prune_threshold")) {
    const auto& p = doc["prune_threshold"];
    if (!p.is_number() || p.get<double>() < 0.0 || p.get<double>() >= 1.0) {
      config_error("prune_threshold", "must be a number in [0, 1)");
    }
    c.prune_threshold = p.get<double>();
  }
  if (doc.contains("traits")) c.traits = string_list(doc, "traits");
  if (doc.contains("analyses")) c.analyses = string_list(doc, "analyses");
  if (doc.contains("analysis_params")) {
    if (!doc["analysis_params"].is_object()) config_error("analysis_params", "must be an object");
    static const std::set<std::string> ap = {"eta", "f_star", "epsilon", "tail_fraction", "window",
                                             "depth_limit", "margin", "particles", "tolerance"};
    for (const auto& [k, _] : doc["analysis_params"].items()) {
      if (!ap.count(k)) config_error("analysis_params." + k, "unknown field");
    }
    c.analysis_params = doc["analysis_params"];
  }
  if (doc.contains("outputs")) {
    const auto& o = doc["outputs"];
    if (!o.is_object()) config_error("outputs", "must be an object");
    for (const auto& [k, v] : o.items()) {
      if (!v.is_string()) config_error("outputs." + k, "must be a string");
      if (k == "trajectory_csv") c.outputs.trajectory_csv = v.get<std::string>();
      else if (k == "report_json") c.outputs.report_json = v.get<std::string>();
      else if (k == "frontier_json") c.outputs.frontier_json = v.get<std::string>();
      else config_error("outputs." + k, "unknown field");
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0) {
      config_error("seed", "must be a non-negative integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (c.engine == Engine::Tree && c.model != "") {
    for (const auto& t : c.traits) registry::make_trait(t);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const std::string text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  json outputs = json::object();
  if (!this->outputs.trajectory_csv.empty()) outputs["trajectory_csv"] = this->outputs.trajectory_csv;
  if (!this->outputs.report_json.empty()) outputs["report_json"] = this->outputs.report_json;
  if (!this->outputs.frontier_json.empty()) outputs["frontier_json"] = this->outputs.frontier_json;
  return {{"engine", engine_name(engine)},
          {"model", model},
          {"params", params},
          {"steps", steps},
          {"prune_threshold", prune_threshold},
          {"traits", traits},
          {"analyses", analyses},
          {"analysis_params", analysis_params},
          {"outputs", outputs},
          {"seed", seed}};
}

json run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  const Outputs out = resolved_outputs(config, out_dir);
  json report;
  switch (config.engine) {
    case Engine::Finite: report = run_finite(config, out); break;
    case Engine::Tree: report = run_tree_engine(config, out); break;
    case Engine::Gaussian:
      if (!out.trajectory_csv.empty() || !out.frontier_json.empty()) {
        config_error("outputs", "the gaussian engine only writes report_json");
      }
      report = run_gaussian(config);
      break;
  }
  if (!out.report_json.empty()) io::write_file(out.report_json, report.dump(2) + "\n");
  return report;
}

json sweep(const ExperimentConfig& config_template, const std::string& axis, const std::vector<json>& values,
           unsigned threads) {
  const json base = config_template.to_json();
  std::vector<json> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      json row = {{"axis", axis}, {"value", values[i]}};
      try {
        json doc = base;
        doc["outputs"] = json::object();
        *locate(doc, axis) = values[i];
        const auto cfg = ExperimentConfig::from_json(doc);
        const json rep = run_experiment(cfg);
        row["status"] = "ok";
        if (rep.contains("final")) {
          row["final_mean_fitness"] = rep["final"]["mean_fitness"];
          row["trait_shares"] = rep["final"]["trait_shares"];
          row["truncated_share_bound"] = rep["final"]["truncated_share_bound"];
        }
        if (rep.contains("final_mean_fitness")) row["final_mean_fitness"] = rep["final_mean_fitness"];
        if (rep.contains("tail")) row["tail"] = rep["tail"];
        if (rep.contains("references")) row["references"] = rep["references"];
        if (rep.contains("eigenvalue")) row["eigenvalue"] = rep["eigenvalue"];
        if (rep.contains("analyses")) {
          for (const auto& [k, v] : rep["analyses"].items()) {
            if (k == "geometric_floor") row["floor_estimate"] = v.value("floor_estimate", json(nullptr));
            if (k.rfind("classify:", 0) == 0) row["verdicts"][k.substr(9)] = v.value("verdict", json(nullptr));
          }
        }
      } catch (const Error& e) {
        row["status"] = "error";
        row["error_code"] = std::string(error_code_name(e.code()));
        row["exit_code"] = exit_code(e.code());
        row["message"] = e.what();
      }
      rows[i] = std::move(row);
    }
  };
  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, values.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  if (n > 0) worker();
  for (auto& t : pool) t.join();
  return {{"axis", axis}, {"rows", rows}};
}

json run_lineage(const ExperimentConfig& config, const std::string& node_path, std::uint64_t steps,
                 std::size_t window) {
  if (config.engine != Engine::Tree) config_error("engine", "lineage needs the tree engine");
  const zoo::ZooModel zm = registry::make_model(config.model, config.params);
  tree::NodeRef origin{tree::Path::parse(node_path), {}};
  origin.state = zm->resolve(origin.path);
  tree::AdvanceOptions opts;
  opts.prune_threshold = config.prune_threshold;
  opts.max_frontier = tree::max_frontier_from_env();
  const auto sizes = tree::lineage_sizes(*zm, origin, steps, opts);
  const std::size_t w = window ? window : std::max<std::size_t>(1, steps / 4);
  json logs = json::array();
  for (double v : sizes) logs.push_back(number_or_null(v));
  json r = {{"model", zm.name},
            {"node", origin.path.to_string()},
            {"depth", origin.depth()},
            {"fitness", zm->fitness(origin.state)},
            {"steps", steps},
            {"prune_threshold", config.prune_threshold},
            {"log_sizes", logs},
            {"estimate", estimate_json(tree::exponent_estimate(sizes, w))}};
  if (config.model == "binary_dyadic") r["closed_form_exponent"] = zoo::binary_closed_form_exponent(origin.path);
  return r;
}

}  // namespace evotree::experiment
