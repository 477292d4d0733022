#pragma once
// Gaussian fitness peak under Gaussian mutation: closed-form equilibrium
// width and dominant eigenvalue, plus a grid discretization of the
// integral operator for d = 1 as an independent numerical check.

#include <cstddef>
#include <string_view>
#include <vector>

namespace evotree::gaussian {

struct GaussianPeak {
  double peak_height = 1.0;         // f0
  double landscape_variance = 1.0;  // s^2
  double mutation_variance = 1.0;   // sigma^2
  int dimension = 1;
  std::vector<double> center;       // empty means the origin

  // Throws Error{ParameterRange} on non-positive variances or dimension < 1.
  void validate() const;
  // sigma^2 / s^2
  double nu() const { return mutation_variance / landscape_variance; }
};

struct GaussianEquilibrium {
  double width = 0.0;       // c
  double eigenvalue = 0.0;  // lambda
};

/// Positive root of c^2 - sigma^2 c - sigma^2 s^2 = 0.
double equilibrium_width(const GaussianPeak& peak);

/// f0 (s^2 / (s^2 + c))^{d/2}. Cross-checked against the nu-parameterized
/// form; throws std::logic_error if they disagree beyond 1e-12 relative.
double peak_eigenvalue(const GaussianPeak& peak);

/// f0 (2 / (2 + nu + sqrt(nu^2 + 4 nu)))^{d/2}.
double peak_eigenvalue_nu_form(const GaussianPeak& peak);

GaussianEquilibrium equilibrium(const GaussianPeak& peak);

struct DiscretizationOptions {
  double half_width = 10.0;
  std::size_t grid_points = 2001;
  double tolerance = 1e-13;
  std::size_t max_iterations = 100000;
};

/// Smallest half-width accepted by the discretization: 6 max(s, sigma, sqrt(c)).
double minimum_half_width(const GaussianPeak& peak);

/// Midpoint grid on [center - h, center + h].
std::vector<double> midpoint_grid(double center, double half_width, std::size_t points);

/// Row-major K_ij = q(x_i | y_j) f(y_j) dy with q the N(y, sigma^2) density.
std::vector<double> discretized_kernel(const GaussianPeak& peak, const DiscretizationOptions& options);

/// Dominant eigenvalue of the discretized operator. d must be 1, the grid odd
/// and >= 3, and the half-width at least minimum_half_width(peak).
/// Throws Error{ParameterRange} or Error{NoConvergence}.
double discretized_dominant_eigenvalue(const GaussianPeak& peak, const DiscretizationOptions& options = {});

enum class Winner { A, B, Tie };
std::string_view winner_name(Winner w);

struct FlattestComparison {
  double lambda_a = 0.0;
  double lambda_b = 0.0;
  Winner winner = Winner::Tie;
};

/// Requires equal mutation variances (Error{ParameterRange} otherwise).
FlattestComparison flattest_compare(const GaussianPeak& a, const GaussianPeak& b);

}  // namespace evotree::gaussian
