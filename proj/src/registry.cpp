#include "evotree/registry.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "evotree/errors.hpp"

namespace evotree::registry {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::ConfigError, what + ": '" + text + "' is not a number");
  }
  return v;
}

void check_keys(const std::string& model, const json& params, std::set<std::string> allowed) {
  if (!params.is_object()) throw Error(ErrorCode::ConfigError, model + ": params must be an object");
  for (const auto& [key, _] : params.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, model + ": unknown parameter '" + key + "'");
  }
}

double number(const std::string& model, const json& params, const std::string& key, double fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) throw Error(ErrorCode::ConfigError, model + ": parameter '" + key + "' must be a number");
  return v.get<double>();
}

std::string text(const std::string& model, const json& params, const std::string& key, std::string fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_string()) throw Error(ErrorCode::ConfigError, model + ": parameter '" + key + "' must be a string");
  return v.get<std::string>();
}

zoo::ZooModel nested(const std::string& model, const json& params, const std::string& key) {
  if (!params.contains(key)) throw Error(ErrorCode::ConfigError, model + ": missing parameter '" + key + "'");
  const auto& spec = params.at(key);
  if (!spec.is_object() || !spec.contains("model") || !spec.at("model").is_string()) {
    throw Error(ErrorCode::ConfigError, model + ": parameter '" + key + "' must be {\"model\", \"params\"}");
  }
  for (const auto& [k, _] : spec.items()) {
    if (k != "model" && k != "params") {
      throw Error(ErrorCode::ConfigError, model + "." + key + ": unknown field '" + k + "'");
    }
  }
  return make_model(spec.at("model").get<std::string>(), spec.value("params", json::object()));
}

}  // namespace

zoo::FitnessSequence fitness_profile(const std::string& spec, double* supremum) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  double sup = std::numeric_limits<double>::quiet_NaN();
  zoo::FitnessSequence seq;
  if (kind == "constant") {
    const double c = arg.empty() ? 1.0 : parse_number(arg, "constant profile");
    if (!(c >= 0.0)) throw Error(ErrorCode::ParameterRange, "constant profile must be >= 0");
    seq = [c](std::uint64_t) { return c; };
    sup = c;
  } else if (kind == "harmonic") {
    seq = [](std::uint64_t t) { return 1.0 / (static_cast<double>(t) + 1.0); };
    sup = 1.0;
  } else if (kind == "ratio") {
    seq = [](std::uint64_t t) {
      const double x = static_cast<double>(t);
      return x / (x + 1.0);
    };
    sup = 1.0;
  } else if (kind == "power") {
    const double base = arg.empty() ? 2.0 : parse_number(arg, "power profile");
    if (!(base > 0.0)) throw Error(ErrorCode::ParameterRange, "power profile base must be > 0");
    seq = [base](std::uint64_t t) { return std::pow(base, static_cast<double>(t)); };
    sup = base > 1.0 ? kInf : 1.0;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown fitness profile '" + spec + "'");
  }
  if (supremum) *supremum = sup;
  return seq;
}

zoo::ZooModel make_model(const std::string& name, const json& params_in) {
  const json params = params_in.is_null() ? json::object() : params_in;
  if (name == "single_ray") {
    check_keys(name, params, {"profile"});
    double sup = 0.0;
    auto seq = fitness_profile(text(name, params, "profile", "constant:1"), &sup);
    return zoo::single_ray(std::move(seq), "single_ray", sup);
  }
  if (name == "two_ray") {
    check_keys(name, params, {"a", "b", "root_fitness"});
    double sa = 0.0, sb = 0.0;
    auto a = fitness_profile(text(name, params, "a", "constant:1"), &sa);
    auto b = fitness_profile(text(name, params, "b", "ratio"), &sb);
    auto z = zoo::two_ray(std::move(a), std::move(b), number(name, params, "root_fitness", 1.0));
    z.fitness_supremum = std::max({sa, sb, z.parameters["root_fitness"]});
    return z;
  }
  if (name == "oscillating_block_ray") {
    check_keys(name, params, {"low", "high", "schedule", "ratio"});
    const std::string schedule = text(name, params, "schedule", "geometric");
    zoo::BlockLength blocks;
    if (schedule == "geometric") {
      const double ratio = number(name, params, "ratio", 4.0);
      if (!(ratio >= 1.0) || ratio != std::floor(ratio)) {
        throw Error(ErrorCode::ParameterRange, "ratio must be an integer >= 1");
      }
      blocks = zoo::geometric_blocks(static_cast<std::uint64_t>(ratio));
    } else if (schedule == "doubly_exponential") {
      blocks = zoo::doubly_exponential_blocks();
    } else {
      throw Error(ErrorCode::ConfigError, name + ": unknown schedule '" + schedule + "'");
    }
    return zoo::oscillating_block_ray(number(name, params, "low", 1.0), number(name, params, "high", 2.0),
                                      std::move(blocks));
  }
  if (name == "binary_dyadic") {
    check_keys(name, params, {});
    return zoo::binary_dyadic();
  }
  if (name == "burst_spine") {
    check_keys(name, params, {"eta", "b"});
    return zoo::burst_spine(number(name, params, "eta", 0.5), number(name, params, "b", 0.5));
  }
  if (name == "lock") {
    check_keys(name, params, {"eta", "inner"});
    return zoo::lock(nested(name, params, "inner"), number(name, params, "eta", 0.5));
  }
  if (name == "nonattained_spine") {
    check_keys(name, params, {"eta"});
    return zoo::nonattained_spine(number(name, params, "eta", 0.5));
  }
  if (name == "unbounded_spine") {
    check_keys(name, params, {"eta", "epsilon", "base"});
    const double base = number(name, params, "base", 4.0);
    if (!(base > 1.0)) throw Error(ErrorCode::ParameterRange, "base must be > 1");
    auto z = zoo::unbounded_spine(number(name, params, "eta", 0.5), number(name, params, "epsilon", 0.1),
                                  [base](std::uint64_t t) { return std::pow(base, static_cast<double>(t)); });
    z.parameters["base"] = base;
    return z;
  }
  if (name == "tensor_product") {
    check_keys(name, params, {"c", "d"});
    return zoo::tensor_product(nested(name, params, "c"), nested(name, params, "d"));
  }
  throw Error(ErrorCode::ConfigError, "unknown model '" + name + "'");
}

std::vector<std::string> model_names() {
  return {"single_ray",        "two_ray",         "oscillating_block_ray", "binary_dyadic", "burst_spine",
          "lock",              "nonattained_spine", "unbounded_spine",     "tensor_product"};
}

tree::TraitPredicate make_trait(const std::string& name) {
  using tree::NodeInfo;
  if (auto tag = tree::tag_from_name(name)) {
    const tree::Tag t = *tag;
    return {name, [t](const NodeInfo& n) { return n.labels.has(t); }};
  }
  if (name == "zero_fitness") return {name, [](const NodeInfo& n) { return n.fitness == 0.0; }};
  if (name == "all") return {name, [](const NodeInfo&) { return true; }};
  if (name == "none") return {name, [](const NodeInfo&) { return false; }};
  if (name.rfind("subtree:", 0) == 0) {
    tree::Path prefix;
    try {
      prefix = tree::Path::parse(name.substr(8));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, "trait '" + name + "': " + e.what());
    }
    return {name, [prefix](const NodeInfo& n) { return n.path.starts_with(prefix); }};
  }
  throw Error(ErrorCode::ConfigError, "unknown trait '" + name + "'");
}

}  // namespace evotree::registry
