#pragma once
// Finite selection-mutation model: N genotypes, fitness f, column-stochastic
// mutation matrix Q. Unnormalized abundances evolve as y' = Q F y with
// F = diag(f); the population state is the simplex-normalized y.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace evotree::finite {

/// Fitness vector plus column-stochastic mutation matrix. Construction
/// validates both; a FiniteModel that exists is always valid.
class FiniteModel {
 public:
  /// `mutation_columns[m][n]` is the probability that an offspring of a type-m
  /// parent has type n. Throws Error{InvalidModel} naming the offending column.
  FiniteModel(std::vector<double> fitness, const std::vector<std::vector<double>>& mutation_columns);

  static FiniteModel from_json(const nlohmann::json& doc);
  static FiniteModel load(const std::string& path);
  nlohmann::json to_json() const;

  std::size_t size() const { return fitness_.size(); }
  std::span<const double> fitness() const { return fitness_; }
  double mutation(std::size_t n, std::size_t m) const { return q_[n * size() + m]; }
  // Row-major Q.
  std::span<const double> mutation_rows() const { return q_; }
  // Row-major A = Q F and its transpose.
  std::span<const double> growth_rows() const { return a_; }
  std::span<const double> growth_transpose_rows() const { return at_; }

  bool mutation_is_identity(double tol = 1e-12) const;
  bool mutation_is_symmetric(double tol = 1e-12) const;

 private:
  std::vector<double> fitness_;
  std::vector<double> q_;
  std::vector<double> a_;
  std::vector<double> at_;
};

/// Simplex-normalized frequencies x(t).
class PopulationState {
 public:
  explicit PopulationState(std::vector<double> frequencies);
  static PopulationState uniform(std::size_t n);

  std::span<const double> frequencies() const { return x_; }
  std::size_t size() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }

 private:
  std::vector<double> x_;
};

struct PriceTerms {
  double selection = 0.0;
  double mutation = 0.0;
  double total = 0.0;
};

struct FisherDelta {
  double delta = 0.0;
  double var_over_mean = 0.0;
};

struct PerronResult {
  double eigenvalue = 0.0;
  std::vector<double> right_vector;
  std::vector<double> left_vector;
  std::size_t iterations = 0;
  bool converged = false;
};

struct PerronOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;
};

struct TrajectoryPoint {
  PopulationState state;
  double mean_fitness = 0.0;
  // Set on the record at which the population went extinct.
  bool extinct = false;
};

double mean_fitness(const FiniteModel& model, const PopulationState& x);

/// One generation: x' proportional to Q F x. Throws Error{ZeroMeanFitness}.
PopulationState step(const FiniteModel& model, const PopulationState& x);

/// Selection (covariance) and transmission terms of the one-step change in
/// the population mean of trait `z`; `total` is measured by propagating x.
PriceTerms price_decomposition(const FiniteModel& model, const PopulationState& x,
                               std::span<const double> z);

/// Mutation-free one-step change of mean fitness against Var(f)/<f>.
FisherDelta fisher_delta(const FiniteModel& model, const PopulationState& x);

/// Dominant eigenpair of A = Q F by power iteration from the uniform vector.
/// Never throws on non-convergence; inspect `converged`.
PerronResult perron_eigenpair(const FiniteModel& model, const PerronOptions& options = {});

/// Power iteration on an arbitrary non-negative row-major square matrix.
/// The left vector is computed only when `transpose_rows` is non-empty.
PerronResult power_iteration(std::span<const double> rows, std::span<const double> transpose_rows,
                             std::size_t n, const PerronOptions& options);

/// B = F^{1/2} Q F^{1/2}, row-major. Throws Error{NotSymmetric}.
std::vector<double> symmetrized_operator(const FiniteModel& model);

/// Element 0 is x0; each later element is one `step` further. Stops early at
/// extinction, flagging the last record.
std::vector<TrajectoryPoint> evolve(const FiniteModel& model, const PopulationState& x0,
                                    std::size_t steps);

/// ||A v - lambda v||_1 for row-major A.
double eigen_residual(std::span<const double> rows, std::span<const double> v, double lambda);

}  // namespace evotree::finite
