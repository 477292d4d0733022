#include "evotree/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evotree/errors.hpp"
#include "evotree/finite.hpp"

namespace evotree::gaussian {

void GaussianPeak::validate() const {
  if (!(peak_height > 0.0)) throw Error(ErrorCode::ParameterRange, "peak_height must be > 0");
  if (!(landscape_variance > 0.0)) throw Error(ErrorCode::ParameterRange, "landscape_variance must be > 0");
  if (!(mutation_variance > 0.0)) throw Error(ErrorCode::ParameterRange, "mutation_variance must be > 0");
  if (dimension < 1) throw Error(ErrorCode::ParameterRange, "dimension must be >= 1");
  if (!center.empty() && center.size() != static_cast<std::size_t>(dimension)) {
    throw Error(ErrorCode::ParameterRange, "center length must equal dimension");
  }
}

double equilibrium_width(const GaussianPeak& peak) {
  peak.validate();
  const double sig2 = peak.mutation_variance;
  const double s2 = peak.landscape_variance;
  return 0.5 * (sig2 + std::sqrt(sig2 * sig2 + 4.0 * sig2 * s2));
}

double peak_eigenvalue_nu_form(const GaussianPeak& peak) {
  peak.validate();
  const double nu = peak.nu();
  const double ratio = 2.0 / (2.0 + nu + std::sqrt(nu * nu + 4.0 * nu));
  return peak.peak_height * std::pow(ratio, 0.5 * peak.dimension);
}

double peak_eigenvalue(const GaussianPeak& peak) {
  const double c = equilibrium_width(peak);
  const double s2 = peak.landscape_variance;
  const double lambda = peak.peak_height * std::pow(s2 / (s2 + c), 0.5 * peak.dimension);
  const double other = peak_eigenvalue_nu_form(peak);
  if (std::fabs(lambda - other) > 1e-12 * std::fabs(lambda)) {
    throw std::logic_error("closed-form eigenvalue forms disagree");
  }
  return lambda;
}

GaussianEquilibrium equilibrium(const GaussianPeak& peak) {
  return {equilibrium_width(peak), peak_eigenvalue(peak)};
}

double minimum_half_width(const GaussianPeak& peak) {
  const double c = equilibrium_width(peak);
  return 6.0 * std::max({std::sqrt(peak.landscape_variance), std::sqrt(peak.mutation_variance),
                         std::sqrt(c)});
}

std::vector<double> midpoint_grid(double center, double half_width, std::size_t points) {
  std::vector<double> grid(points);
  const double dy = 2.0 * half_width / static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = center - half_width + (static_cast<double>(i) + 0.5) * dy;
  }
  return grid;
}

std::vector<double> discretized_kernel(const GaussianPeak& peak, const DiscretizationOptions& options) {
  const std::size_t n = options.grid_points;
  const double center = peak.center.empty() ? 0.0 : peak.center[0];
  const auto grid = midpoint_grid(center, options.half_width, n);
  const double dy = 2.0 * options.half_width / static_cast<double>(n);
  const double sig2 = peak.mutation_variance;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sig2);

  std::vector<double> weight(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = grid[j] - center;
    weight[j] = peak.peak_height * std::exp(-u * u / (2.0 * peak.landscape_variance)) * dy;
  }
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u = grid[i] - grid[j];
      k[i * n + j] = norm * std::exp(-u * u / (2.0 * sig2)) * weight[j];
    }
  }
  return k;
}

double discretized_dominant_eigenvalue(const GaussianPeak& peak, const DiscretizationOptions& options) {
  peak.validate();
  if (peak.dimension != 1) throw Error(ErrorCode::ParameterRange, "discretization supports d = 1 only");
  if (options.grid_points < 3 || options.grid_points % 2 == 0) {
    throw Error(ErrorCode::ParameterRange, "grid_points must be odd and >= 3");
  }
  const double needed = minimum_half_width(peak);
  if (options.half_width < needed) {
    throw Error(ErrorCode::ParameterRange,
                "half_width " + std::to_string(options.half_width) + " below required " + std::to_string(needed));
  }
  const auto k = discretized_kernel(peak, options);
  finite::PerronOptions po{options.tolerance, options.max_iterations};
  const auto result = finite::power_iteration(k, {}, options.grid_points, po);
  if (!result.converged) throw Error(ErrorCode::NoConvergence, "discretized operator power iteration");
  return result.eigenvalue;
}

std::string_view winner_name(Winner w) {
  switch (w) {
    case Winner::A: return "a";
    case Winner::B: return "b";
    case Winner::Tie: return "tie";
  }
  return "tie";
}

FlattestComparison flattest_compare(const GaussianPeak& a, const GaussianPeak& b) {
  if (a.mutation_variance != b.mutation_variance) {
    throw Error(ErrorCode::ParameterRange, "peaks must share the mutation variance");
  }
  FlattestComparison out{peak_eigenvalue(a), peak_eigenvalue(b), Winner::Tie};
  if (std::fabs(out.lambda_a - out.lambda_b) > 1e-12) {
    out.winner = out.lambda_a > out.lambda_b ? Winner::A : Winner::B;
  }
  return out;
}

}  // namespace evotree::gaussian
