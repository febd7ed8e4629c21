#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rcov/sample.hpp"
#include "rcov/symmat.hpp"

namespace rcov {

// ---------------------------------------------------------------------------
// Eigenvalues in relative scale

/// If (1 - eps) S_lambda <= Shat_lambda <= (1 + eps) S_lambda with lambda <= lambda_k,
/// then (1 - 2 eps) lambda_i <= lambdahat_i <= (1 + 2 eps) lambda_i for i <= k.
struct EigenReport {
  std::vector<double> eigenvalues;  // of Shat, non-increasing
  double epsilon = 0.0;
  double radius = 0.0;  // 2 eps
  std::size_t k = 0;
  /// Certified range [lambdahat_i / (1 + 2eps), lambdahat_i / (1 - 2eps)] for lambda_i, i < k.
  std::vector<std::pair<double, double>> intervals;
  /// Certified range for lambda_i / lambda_k, i < k.
  std::vector<std::pair<double, double>> ratio_intervals;
};

/// Throws InvalidEpsilon unless 0 <= eps < 1/2.
EigenReport eigenvalue_intervals(const PsdMatrix& shat, double eps, std::size_t k);

/// True iff (1 - 2 eps) truth_i <= estimate_i <= (1 + 2 eps) truth_i for every
/// listed index. Both lists non-increasing.
bool eigenvalue_bounds_hold(std::span<const double> truth, std::span<const double> estimate,
                            double eps, std::span<const std::size_t> indices);

struct SubspaceOptions {
  std::size_t max_iters = 1000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  /// d x k starting block; a seeded Gaussian draw when absent.
  std::optional<DenseMatrix> initial;
};

struct SubspaceResult {
  DenseMatrix basis;  // d x k, orthonormal columns
  std::size_t iterations = 0;
  double residual = 0.0;  // ||Shat U - U (U^T Shat U)||
  bool converged = false;
};

/// Multiply by Shat and re-orthonormalize (Householder QR) until the
/// invariant-subspace residual drops below tol or max_iters multiplications.
SubspaceResult subspace_iteration(const PsdMatrix& shat, std::size_t k,
                                  const SubspaceOptions& opts = {});

// ---------------------------------------------------------------------------
// Ridge regression with a robust covariance estimate

struct RidgeConfig {
  double lambda = 0.0;
  double delta = 0.1;
  double kappa = 1.0;
  double response_kurtosis = 1.0;       // varkappa
  double response_second_moment = 1.0;  // v^2
  /// Truncation level; nullopt resolves it with ridge_theta_bar.
  std::optional<double> theta_bar;
  /// df_lambda used by the automatic level; defaults to df_lambda(Shat), floored at 1.
  std::optional<double> df_lambda;
};

struct RidgeEstimate {
  Vector weights;         // w_bar
  Vector truncated_mean;  // Z_bar in the basis of the Cholesky factor
  std::vector<double> truncation_weights;
  PsdMatrix covariance;
  CholFactor factor;  // of covariance + lambda I
  double theta_bar = 0.0;
  std::size_t n = 0;
};

/// sqrt(n kappa^2 varkappa^2 v^2 df / log(1/delta)), delta in (0, 1).
double ridge_theta_bar(std::size_t n, double kappa, double response_kurtosis, double v2,
                       double df_lambda, double delta);

/// Mean of the vectors after shrinking each to norm at most theta:
/// (1/n) sum_i min(1, theta / ||z_i||) z_i.
Vector truncated_mean(std::span<const Vector> z, double theta);

/// Same quantity through the matrix route: average of the spectrally truncated
/// Hermitian dilations, top-right block.
Vector dilation_mean(std::span<const Vector> z, double theta);

/// w_bar = (Shat + lambda I)^{-1} applied to the truncated mean of the
/// whitened products. `shat` must come from observations disjoint from (x, y).
RidgeEstimate robust_ridge(SampleView x, std::span<const double> y, const PsdMatrix& shat,
                           const RidgeConfig& cfg);

/// Minimizer of (1/n) sum (y_i - x_i^T w)^2 + lambda ||w||^2.
Vector ordinary_ridge(SampleView x, std::span<const double> y, double lambda);

/// (w - w*)^T S (w - w*).
double excess_risk(const Vector& w, const Vector& w_star, const PsdMatrix& s);

/// Plug-in moments for the automatic truncation level.
struct RidgeMoments {
  double kappa = 1.0;
  double response_kurtosis = 1.0;
  double response_second_moment = 1.0;
};

RidgeMoments estimate_ridge_moments(SampleView x, std::span<const double> y, std::uint64_t seed);

}  // namespace rcov
