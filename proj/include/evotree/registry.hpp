#pragma once
// Zoo models and trait predicates addressable by name, for configs and the CLI.

#include <string>
#include <vector>

#include "evotree/tree.hpp"
#include "evotree/zoo.hpp"
#include "json.hpp"

namespace evotree::registry {

/// Fitness sequences by name: "constant:<c>", "harmonic" (1/(t+1)),
/// "ratio" (t/(t+1)), "power:<base>" (base^t). Sets `supremum` (f*) when given.
/// Throws Error{ConfigError}.
zoo::FitnessSequence fitness_profile(const std::string& spec, double* supremum = nullptr);

/// Builds a zoo model from its name and parameter object, e.g.
/// ("burst_spine", {"eta": 0.5, "b": 0.5}). lock takes {"eta", "inner"} and
/// tensor_product takes {"c", "d"}, where inner, c and d are {"model", "params"}.
/// Unknown names or parameters throw Error{ConfigError}; out-of-range values
/// throw Error{ParameterRange}.
zoo::ZooModel make_model(const std::string& name, const nlohmann::json& params);

std::vector<std::string> model_names();

/// locked, spine, burst, dead, ray_a, ray_b, zero_fitness, all, none, or
/// subtree:<path>. Throws Error{ConfigError}.
tree::TraitPredicate make_trait(const std::string& name);

}  // namespace evotree::registry
