#pragma once

// Scalar truncation maps and the truncated (Wei-Minsker) covariance estimator
//   S_WM = (1/n) sum_i rho_theta(||x_i||) x_i x_i^T,
// where rho_theta(x) = psi_theta(x^2) / x^2 shrinks observations whose squared
// norm exceeds theta back onto the sphere of squared radius theta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rcov/sample.hpp"
#include "rcov/symmat.hpp"

namespace rcov {

/// (|x| ^ theta) sign(x).
inline double psi(double x, double theta) { return std::copysign(std::min(std::abs(x), theta), x); }

/// Weight for an observation with squared norm `x2`: 1 if x2 <= theta, else theta / x2.
inline double rho_sq(double x2, double theta) { return x2 <= theta ? 1.0 : theta / x2; }

/// psi_theta(x^2) / x^2 with rho(0) = 1.
inline double rho(double x, double theta) { return rho_sq(x * x, theta); }

/// Throws InvalidConfidence unless 0 < delta <= 1.
void require_confidence(double delta);

struct WeightedEstimate {
  PsdMatrix estimate;
  std::vector<double> weights;
  double theta = 0.0;
};

/// (1/n) sum_i w_i x_i x_i^T accumulated sequentially over i through the
/// active kernel. Weights must be nonnegative.
PsdMatrix weighted_covariance(SampleView x, std::span<const double> weights);

/// (1/n) sum_i x_i x_i^T.
PsdMatrix sample_covariance(SampleView x);

WeightedEstimate wei_minsker(SampleView x, double theta);

/// sqrt(n W / log(2d / delta)).
double wm_theta(std::size_t n, double w_bar, std::size_t d, double delta);

/// kappa^4 ||S|| tr(S), an upper bound on ||E[||X||^2 X X^T]||.
double second_moment_bound(const PsdMatrix& s, double kappa);

/// Plug-in ||(1/n) sum_i ||x_i||^2 x_i x_i^T||.
double empirical_second_moment(SampleView x);

}  // namespace rcov
