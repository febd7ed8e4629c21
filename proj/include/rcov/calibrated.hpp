#pragma once

// Robust calibrated covariance estimation.
//
// The sample is split into T + 1 batches of size m = floor(n / (2(T + 1)))
// and a final batch holding the remaining r = n - m(T + 1) observations.
// Starting from a truncated estimate at regularization L, each batch refines
// the estimate at half the previous regularization level: observations are
// whitened by the Cholesky factor of the current regularized estimate and
// truncated by their whitened norm. The final batch does the same at level
// lambda_T = L / 2^T with an inflated truncation level, which yields an
// estimate satisfying (1 - eps) S_lambda <= Shat_lambda <= (1 + eps) S_lambda.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcov/sample.hpp"
#include "rcov/symmat.hpp"
#include "rcov/truncation.hpp"

namespace rcov {

/// Half-open row interval [begin, end) into the sample (0-based).
struct BatchRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct BatchPlan {
  std::size_t iterations = 0;  // T
  std::size_t levels = 0;      // q = T + 1
  std::size_t batch_size = 0;  // m
  std::size_t final_size = 0;  // r = n - m q
  std::size_t n = 0;
  /// q refinement batches followed by the final batch.
  std::vector<BatchRange> ranges;

  const BatchRange& batch(std::size_t t) const { return ranges.at(t); }
  const BatchRange& final_batch() const { return ranges.back(); }
};

/// Smallest T >= 0 with L / 2^T <= lambda, i.e. ceil(log2(L / lambda)).
std::size_t halving_steps(double lambda, double upper);

/// Batch schedule. Throws SampleTooSmall when n < 4q and `enforce_min` is set.
BatchPlan plan_batches(std::size_t n, double lambda, double upper, bool enforce_min = true);

/// 2 kappa^2 sqrt(n df / (q log(4 q d / delta))), q = ceil(log2(L / lambda)) + 1.
double theta_star(std::size_t n, std::size_t d, double delta, double lambda, double upper,
                  double kappa, double df_lambda);

/// ceil(48 q theta log(4 q d / delta)).
std::size_t min_sample_size(double theta, std::size_t q, std::size_t d, double delta);

/// 2 theta sqrt(T + 1) sqrt(1 + log(T + 1) / log(4d / delta)).
double final_theta(double theta, std::size_t iterations, std::size_t d, double delta);

/// 24 theta sqrt(q log(4 q d / delta) log(4 d / delta)) / n.
double error_bound(double theta, std::size_t q, std::size_t d, double delta, std::size_t n);

/// (1/m) sum_i rho_theta(||x_i|| / sqrt(L)) x_i x_i^T.
WeightedEstimate initial_estimate(SampleView batch0, double upper, double theta);

/// Whitens the batch by chol(current + lambda_t I) and truncates by whitened
/// norm: (1/m) sum_i rho_theta(||R^{-1} x_i||) x_i x_i^T.
WeightedEstimate refine_step(const PsdMatrix& current, double lambda_t, SampleView batch,
                             double theta);

/// Known kurtosis and degrees of freedom used to resolve theta = Auto.
struct KurtosisDfHint {
  double kappa = 1.0;
  double df_lambda = 1.0;
};

struct CalibratedConfig {
  double delta = 0.1;
  double lambda = 0.0;
  /// Upper bound L >= ||S||. nullopt resolves it from a pilot subsample.
  std::optional<double> upper;
  /// Truncation level. nullopt resolves it to theta_star. +inf disables truncation.
  std::optional<double> theta;
  std::optional<KurtosisDfHint> hint;
  bool keep_intermediates = false;
  /// Seed for the random directions used when kurtosis must be estimated.
  std::uint64_t seed = 0;
};

struct CalibratedEstimate {
  PsdMatrix estimate;
  std::vector<double> final_weights;
  BatchPlan plan;
  double theta_used = 0.0;
  double theta_final = 0.0;
  /// L, L/2, ..., L/2^T.
  std::vector<double> lambda_schedule;
  /// Shat^(0), ..., Shat^(T) when requested.
  std::vector<PsdMatrix> intermediate_estimates;
  double upper = 0.0;
  bool upper_from_pilot = false;
  /// Rows consumed by the pilot subsample; the schedule covers the rest.
  std::size_t pilot_rows = 0;
  /// Certified accuracy: error_bound(theta_used, q, d, delta, n).
  double epsilon = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  std::size_t dim = 0;
  std::optional<double> kappa_used;
  std::optional<double> df_used;
  std::size_t advisory_min_n = 0;
  std::vector<std::string> warnings;
};

/// Pilot-based L: 2 ||S_WM(pilot)||. Requires lambda <= (2/3) ||S_WM||.
double resolve_upper_from_pilot(SampleView pilot, double lambda, double delta);

/// Rows reserved for the pilot when L is resolved automatically.
std::size_t pilot_size(std::size_t n);

/// Max over coordinate axes and `random_dirs` Gaussian directions of
/// (mean <x,u>^4)^{1/4} / (mean <x,u>^2)^{1/2}, floored at 1.
double estimate_kurtosis(SampleView x, std::size_t random_dirs, std::uint64_t seed);

CalibratedEstimate run_algorithm1(SampleView x, const CalibratedConfig& cfg);

}  // namespace rcov
