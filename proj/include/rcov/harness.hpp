#pragma once

// Synthetic heavy-tailed data with known covariance, and Monte Carlo
// campaigns that measure calibrated error against the ground truth.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcov/adaptive.hpp"
#include "rcov/sample.hpp"
#include "rcov/symmat.hpp"

namespace rcov {

enum class Family { gaussian, student_t, scale_mixture };

struct DistributionSpec {
  Family family = Family::gaussian;
  double nu = 5.0;      // student_t degrees of freedom, > 4
  double mix_p = 0.05;  // scale_mixture: probability of the inflated scale
  double mix_c = 10.0;  // scale_mixture: inflation factor
  PsdMatrix sigma;
  std::uint64_t seed = 0;

  static DistributionSpec gaussian(PsdMatrix sigma, std::uint64_t seed);
  static DistributionSpec student_t(double nu, PsdMatrix sigma, std::uint64_t seed);
  static DistributionSpec scale_mixture(double p, double c, PsdMatrix sigma, std::uint64_t seed);
};

/// Throws InvalidSpec for nu <= 4, p outside [0, 1], c <= 0 or an empty Sigma.
void validate(const DistributionSpec& spec);

/// splitmix64 finalizer of seed + stream, used to give each trial its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n i.i.d. zero-mean draws with covariance exactly Sigma. Deterministic in spec.seed.
SampleMatrix sample(const DistributionSpec& spec, std::size_t n);

/// Exact directional kurtosis constant (E<X,u>^4)^{1/4} / (E<X,u>^2)^{1/2}.
double kurtosis(const DistributionSpec& spec);

/// diag(1, 1/2, ..., 1/d).
PsdMatrix harmonic_spectrum(std::size_t d);

enum class EstimatorKind { algorithm1, algorithm2, sample_covariance, wei_minsker };

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::algorithm1;
  double delta = 0.1;
  double lambda = 0.1;
  std::optional<double> upper;
  /// Explicit truncation level. When absent: algorithm1 uses theta_star with
  /// the true kurtosis and df_lambda(Sigma); wei_minsker uses wm_theta with
  /// second_moment_bound(Sigma, kappa).
  std::optional<double> theta;
  /// algorithm2 grid; auto grid when absent.
  std::optional<ThetaGrid> grid;

  std::string name() const;
};

struct PhaseTiming {
  double sample_ns = 0.0;
  double estimate_ns = 0.0;
  double metrics_ns = 0.0;
};

struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  bool ok = false;
  std::string error;
  double calibrated_error = 0.0;
  /// Certified accuracy when the estimator carries one.
  std::optional<double> epsilon;
  bool certificate_pass = false;  // calibrated_error <= epsilon
  bool sandwich_pass = false;     // sandwich_check at epsilon
  /// |lambdahat_i - lambda_i| / lambda_i, descending order.
  std::vector<double> eigen_relative_errors;
  /// (1 - 2eps) lambda_i <= lambdahat_i <= (1 + 2eps) lambda_i for all lambda_i >= lambda.
  bool eigen_bounds_pass = false;
  std::optional<double> selected_theta;
  PhaseTiming timing;
};

/// Runs every estimator on the same draw for each trial. Reports are ordered
/// by trial, then by estimator.
std::vector<TrialReport> run_campaign(const DistributionSpec& spec, std::size_t n,
                                      std::span<const EstimatorConfig> estimators,
                                      std::size_t trials, std::size_t parallelism);

std::vector<TrialReport> run_trials(const DistributionSpec& spec, std::size_t n,
                                    const EstimatorConfig& estimator, std::size_t trials,
                                    std::size_t parallelism);

struct CoverageSummary {
  std::string estimator;
  std::size_t trials = 0;
  std::size_t failures = 0;  // trials that raised an error
  double pass_fraction = 0.0;
  double sandwich_fraction = 0.0;
  double eigen_fraction = 0.0;
  double error_q50 = 0.0;
  double error_q90 = 0.0;
  double error_q95 = 0.0;
  PhaseTiming mean_timing;
};

/// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> values, double p);

/// One summary per estimator, in first-appearance order.
std::vector<CoverageSummary> coverage_report(std::span<const TrialReport> reports);

struct ComplexityRow {
  std::size_t n = 0;
  std::size_t d = 0;
  double seconds = 0.0;
};

struct ComplexityTable {
  std::vector<ComplexityRow> rows;
  double slope_seconds_per_obs = 0.0;  // least squares of seconds on n
};

/// Wall-clock of one estimator run per n (best of `repeats`), data drawn from
/// `spec` with its dimension.
ComplexityTable complexity_probe(const DistributionSpec& spec, std::span<const std::size_t> n_list,
                                 const EstimatorConfig& config, std::size_t repeats = 3);

}  // namespace rcov
