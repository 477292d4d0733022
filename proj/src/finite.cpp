#include "evotree/finite.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "evotree/errors.hpp"
#include "evotree/kernels.hpp"

namespace evotree::finite {
namespace {

constexpr double kStochasticTol = 1e-12;

std::vector<double> normalized(std::vector<double> v) {
  const double total = kernels::sum(v);
  kernels::scale(v, 1.0 / total);
  return v;
}

}  // namespace

FiniteModel::FiniteModel(std::vector<double> fitness,
                         const std::vector<std::vector<double>>& mutation_columns)
    : fitness_(std::move(fitness)) {
  const std::size_t n = fitness_.size();
  if (n == 0) throw Error(ErrorCode::InvalidModel, "fitness vector is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(fitness_[i] >= 0.0) || !std::isfinite(fitness_[i])) {
      throw Error(ErrorCode::InvalidModel, "fitness[" + std::to_string(i) + "] must be finite and >= 0");
    }
  }
  if (mutation_columns.size() != n) {
    throw Error(ErrorCode::InvalidModel, "mutation has " + std::to_string(mutation_columns.size()) +
                                             " columns, expected " + std::to_string(n));
  }
  q_.assign(n * n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const auto& column = mutation_columns[m];
    if (column.size() != n) {
      throw Error(ErrorCode::InvalidModel, "mutation column " + std::to_string(m) + " has length " +
                                               std::to_string(column.size()) + ", expected " +
                                               std::to_string(n));
    }
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (!(column[r] >= 0.0) || !std::isfinite(column[r])) {
        throw Error(ErrorCode::InvalidModel, "mutation column " + std::to_string(m) +
                                                 " has a negative or non-finite entry at row " +
                                                 std::to_string(r));
      }
      total += column[r];
      q_[r * n + m] = column[r];
    }
    if (std::fabs(total - 1.0) > kStochasticTol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "mutation column " << m << " sums to " << total << ", expected 1";
      throw Error(ErrorCode::InvalidModel, msg.str());
    }
  }
  a_.resize(n * n);
  at_.resize(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      a_[r * n + c] = q_[r * n + c] * fitness_[c];
      at_[c * n + r] = a_[r * n + c];
    }
  }
}

FiniteModel FiniteModel::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("fitness") || !doc.contains("mutation")) {
    throw Error(ErrorCode::InvalidModel, "model document needs keys 'fitness' and 'mutation'");
  }
  try {
    auto fitness = doc.at("fitness").get<std::vector<double>>();
    auto columns = doc.at("mutation").get<std::vector<std::vector<double>>>();
    return FiniteModel(std::move(fitness), columns);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("malformed model document: ") + e.what());
  }
}

FiniteModel FiniteModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidModel, path + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json FiniteModel::to_json() const {
  const std::size_t n = size();
  std::vector<std::vector<double>> columns(n, std::vector<double>(n));
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t r = 0; r < n; ++r) columns[m][r] = mutation(r, m);
  }
  return {{"fitness", fitness_}, {"mutation", columns}};
}

bool FiniteModel::mutation_is_identity(double tol) const {
  const std::size_t n = size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (std::fabs(mutation(r, c) - (r == c ? 1.0 : 0.0)) > tol) return false;
    }
  }
  return true;
}

bool FiniteModel::mutation_is_symmetric(double tol) const {
  const std::size_t n = size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = r + 1; c < n; ++c) {
      if (std::fabs(mutation(r, c) - mutation(c, r)) > tol) return false;
    }
  }
  return true;
}

PopulationState::PopulationState(std::vector<double> frequencies) : x_(std::move(frequencies)) {
  if (x_.empty()) throw Error(ErrorCode::InvalidModel, "population state is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!(x_[i] >= 0.0)) {
      throw Error(ErrorCode::InvalidModel, "frequency[" + std::to_string(i) + "] is negative");
    }
    total += x_[i];
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidModel, "frequencies sum to " + std::to_string(total));
  }
}

PopulationState PopulationState::uniform(std::size_t n) {
  return PopulationState(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double mean_fitness(const FiniteModel& model, const PopulationState& x) {
  return kernels::dot(model.fitness(), x.frequencies());
}

PopulationState step(const FiniteModel& model, const PopulationState& x) {
  const double mean = mean_fitness(model, x);
  if (!(mean > 0.0)) throw Error(ErrorCode::ZeroMeanFitness, "population has zero mean fitness");
  std::vector<double> y(model.size());
  kernels::gemv(model.growth_rows(), x.frequencies(), y);
  return PopulationState(normalized(std::move(y)));
}

PriceTerms price_decomposition(const FiniteModel& model, const PopulationState& x,
                               std::span<const double> z) {
  const std::size_t n = model.size();
  if (z.size() != n) throw Error(ErrorCode::InvalidModel, "trait vector length mismatch");
  const double mean = mean_fitness(model, x);
  if (!(mean > 0.0)) throw Error(ErrorCode::ZeroMeanFitness, "population has zero mean fitness");

  const auto f = model.fitness();
  const double z_bar = kernels::dot(x.frequencies(), z);
  PriceTerms terms;
  for (std::size_t i = 0; i < n; ++i) {
    const double selected = f[i] * x[i] / mean;
    // expected trait value of an offspring of a type-i parent
    double z_offspring = 0.0;
    for (std::size_t r = 0; r < n; ++r) z_offspring += model.mutation(r, i) * z[r];
    terms.selection += selected * z[i];
    terms.mutation += selected * (z_offspring - z[i]);
  }
  terms.selection -= z_bar;

  const PopulationState next = step(model, x);
  terms.total = kernels::dot(next.frequencies(), z) - z_bar;
  return terms;
}

FisherDelta fisher_delta(const FiniteModel& model, const PopulationState& x) {
  if (!model.mutation_is_identity()) {
    throw Error(ErrorCode::NotMutationFree, "mutation matrix is not the identity");
  }
  const double mean = mean_fitness(model, x);
  if (!(mean > 0.0)) throw Error(ErrorCode::ZeroMeanFitness, "population has zero mean fitness");
  double variance = 0.0;
  const auto f = model.fitness();
  for (std::size_t i = 0; i < model.size(); ++i) variance += x[i] * (f[i] - mean) * (f[i] - mean);
  const PopulationState next = step(model, x);
  return {mean_fitness(model, next) - mean, variance / mean};
}

double eigen_residual(std::span<const double> rows, std::span<const double> v, double lambda) {
  std::vector<double> av(v.size());
  kernels::gemv(rows, v, av);
  double residual = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) residual += std::fabs(av[i] - lambda * v[i]);
  return residual;
}

namespace {

struct SweepOutcome {
  std::vector<double> vector;
  double eigenvalue = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Simplex-normalized power iteration. Convergence needs the eigenvalue
// estimate to be stable on two consecutive sweeps and the eigen-residual
// lambda * ||v' - v||_1 to be below tolerance.
SweepOutcome sweep(std::span<const double> rows, std::size_t n, const PerronOptions& options) {
  SweepOutcome out;
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  std::vector<double> u(n);
  double previous = -1.0;
  int stable = 0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    kernels::gemv(rows, v, u);
    const double lambda = kernels::sum(u);
    out.iterations = it;
    if (!(lambda > 0.0)) {
      out.vector = v;
      out.eigenvalue = 0.0;
      return out;
    }
    kernels::scale(u, 1.0 / lambda);
    const double residual = lambda * kernels::l1_distance(u, v);
    const bool value_stable =
        previous > 0.0 && std::fabs(lambda - previous) <= options.tolerance * lambda;
    stable = value_stable ? stable + 1 : 0;
    std::swap(u, v);
    previous = lambda;
    out.eigenvalue = lambda;
    if (stable >= 2 && residual <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.vector = std::move(v);
  return out;
}

}  // namespace

PerronResult power_iteration(std::span<const double> rows, std::span<const double> transpose_rows,
                             std::size_t n, const PerronOptions& options) {
  if (!(options.tolerance > 0.0)) throw Error(ErrorCode::ParameterRange, "tolerance must be > 0");
  SweepOutcome right = sweep(rows, n, options);
  PerronResult result;
  result.eigenvalue = right.eigenvalue;
  result.right_vector = std::move(right.vector);
  result.iterations = right.iterations;
  result.converged = right.converged;
  if (!transpose_rows.empty()) {
    SweepOutcome left = sweep(transpose_rows, n, options);
    const double overlap = kernels::dot(left.vector, result.right_vector);
    if (overlap > 0.0) kernels::scale(left.vector, 1.0 / overlap);
    result.left_vector = std::move(left.vector);
    result.iterations = std::max(result.iterations, left.iterations);
    result.converged = result.converged && left.converged;
  }
  return result;
}

PerronResult perron_eigenpair(const FiniteModel& model, const PerronOptions& options) {
  return power_iteration(model.growth_rows(), model.growth_transpose_rows(), model.size(), options);
}

std::vector<double> symmetrized_operator(const FiniteModel& model) {
  if (!model.mutation_is_symmetric()) {
    throw Error(ErrorCode::NotSymmetric, "mutation matrix is not symmetric");
  }
  const std::size_t n = model.size();
  const auto f = model.fitness();
  std::vector<double> b(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      b[r * n + c] = std::sqrt(f[r]) * model.mutation(r, c) * std::sqrt(f[c]);
    }
  }
  return b;
}

std::vector<TrajectoryPoint> evolve(const FiniteModel& model, const PopulationState& x0,
                                    std::size_t steps) {
  std::vector<TrajectoryPoint> out;
  out.reserve(steps + 1);
  out.push_back({x0, mean_fitness(model, x0), false});
  for (std::size_t t = 0; t < steps; ++t) {
    if (!(out.back().mean_fitness > 0.0)) {
      out.back().extinct = true;
      break;
    }
    PopulationState next = step(model, out.back().state);
    const double mean = mean_fitness(model, next);
    out.push_back({std::move(next), mean, false});
  }
  if (!(out.back().mean_fitness > 0.0)) out.back().extinct = true;
  return out;
}

}  // namespace evotree::finite
