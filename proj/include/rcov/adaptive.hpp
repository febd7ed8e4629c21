#pragma once

// Lepskii-type selection of the truncation level. The calibrated estimator
// is run for every theta on a dyadic grid, each with its own error bound
// eps_j; the selected level is the smallest j whose estimate is within
// 2 (eps_j + eps_j') of every estimate with a larger truncation level, in the
// metric calibrated by that larger-level estimate.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rcov/calibrated.hpp"

namespace rcov {

class ThetaGrid {
 public:
  /// {2^j theta_min : theta_min <= 2^j theta_min <= 2 theta_max}.
  static ThetaGrid build(double theta_min, double theta_max);
  /// Explicit levels; each must be exactly twice the previous one.
  static ThetaGrid from_levels(std::vector<double> levels);

  double theta_min() const { return theta_min_; }
  double theta_max() const { return theta_max_; }
  const std::vector<double>& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }

 private:
  double theta_min_ = 0.0;
  double theta_max_ = 0.0;
  std::vector<double> levels_;
};

ThetaGrid build_grid(double theta_min, double theta_max);

/// Grid from the closed-form sample-size rule: J = 1 + ceil(log2(n / 96q) / 2),
/// theta_max = n / (96 q log(4 q d J / delta)), theta_min = 2^{1-J} theta_max.
struct AutoGrid {
  ThetaGrid grid;
  std::size_t cardinality = 0;  // the rule's J; grid.size() may be J + 1
};

AutoGrid auto_grid(std::size_t n, std::size_t q, std::size_t d, double delta);

/// error_bound with delta / J in place of delta.
double epsilon_j(double theta_j, std::size_t q, std::size_t d, double delta, std::size_t n,
                 std::size_t grid_size);

/// ||(S_j' + lambda I)^{-1/2} (S_j' - S_j) (S_j' + lambda I)^{-1/2}||.
double pairwise_statistic(const PsdMatrix& est_j, const PsdMatrix& est_jp, double lambda);

bool pairwise_test(const PsdMatrix& est_j, const PsdMatrix& est_jp, double lambda, double eps_j,
                   double eps_jp);

struct LepskiiSelection {
  std::size_t index = 0;
  /// passed[j][j'] for j < j'; entries with j >= j' are true.
  std::vector<std::vector<bool>> passed;
};

LepskiiSelection lepskii_select(std::span<const PsdMatrix> estimates, std::span<const double> eps,
                                double lambda);

struct AdaptiveConfig {
  double delta = 0.1;
  double lambda = 0.0;
  std::optional<double> upper;
  /// Explicit grid; nullopt selects auto_grid.
  std::optional<ThetaGrid> grid;
  /// Worker threads for the per-level runs.
  std::size_t threads = 1;
};

struct LevelResult {
  double theta = 0.0;
  double epsilon = 0.0;
  CalibratedEstimate run;
};

struct AdaptiveResult {
  std::size_t selected_index = 0;
  ThetaGrid grid;
  std::optional<std::size_t> auto_cardinality;
  std::vector<LevelResult> per_level;
  std::vector<std::vector<bool>> pairwise_test_log;
  double upper = 0.0;
  std::size_t pilot_rows = 0;

  const CalibratedEstimate& selected() const { return per_level.at(selected_index).run; }
};

AdaptiveResult run_algorithm2(SampleView x, const AdaptiveConfig& cfg);

}  // namespace rcov
