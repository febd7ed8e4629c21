#include "rcov/adaptive.hpp"

#include <cmath>
#include <string>

#include "rcov/error.hpp"
#include "rcov/parallel.hpp"

namespace rcov {

ThetaGrid ThetaGrid::build(double theta_min, double theta_max) {
  if (!(theta_min > 0.0) || !(theta_max >= theta_min) || !std::isfinite(theta_max)) {
    throw InvalidRange("theta range must satisfy 0 < theta_min <= theta_max < inf");
  }
  ThetaGrid g;
  g.theta_min_ = theta_min;
  g.theta_max_ = theta_max;
  const double cap = 2.0 * theta_max * (1.0 + 1e-12);
  for (int j = 0;; ++j) {
    const double level = std::ldexp(theta_min, j);
    if (level > cap) break;
    g.levels_.push_back(level);
  }
  return g;
}

ThetaGrid ThetaGrid::from_levels(std::vector<double> levels) {
  if (levels.empty() || !(levels.front() > 0.0)) throw InvalidRange("grid needs positive levels");
  for (std::size_t j = 1; j < levels.size(); ++j) {
    if (levels[j] != 2.0 * levels[j - 1]) throw InvalidRange("grid levels must double");
  }
  ThetaGrid g;
  g.theta_min_ = levels.front();
  g.theta_max_ = levels.back();
  g.levels_ = std::move(levels);
  return g;
}

ThetaGrid build_grid(double theta_min, double theta_max) {
  return ThetaGrid::build(theta_min, theta_max);
}

AutoGrid auto_grid(std::size_t n, std::size_t q, std::size_t d, double delta) {
  require_confidence(delta);
  const std::size_t unit = 96 * q;
  if (q == 0 || n < unit) {
    throw SampleTooSmall("automatic grid needs n >= 96q = " + std::to_string(unit));
  }
  // ceil(log2(n / 96q) / 2) is the smallest k with 96q 4^k >= n.
  std::size_t k = 0;
  for (double reach = static_cast<double>(unit); reach < static_cast<double>(n); reach *= 4.0) ++k;
  const std::size_t cardinality = 1 + k;
  const double qq = static_cast<double>(q);
  const double theta_max =
      static_cast<double>(n) /
      (96.0 * qq * std::log(4.0 * qq * static_cast<double>(d) * static_cast<double>(cardinality) / delta));
  const double theta_min = std::ldexp(theta_max, 1 - static_cast<int>(cardinality));
  return {ThetaGrid::build(theta_min, theta_max), cardinality};
}

double epsilon_j(double theta_j, std::size_t q, std::size_t d, double delta, std::size_t n,
                 std::size_t grid_size) {
  if (grid_size == 0) throw InvalidRange("empty grid");
  return error_bound(theta_j, q, d, delta / static_cast<double>(grid_size), n);
}

double pairwise_statistic(const PsdMatrix& est_j, const PsdMatrix& est_jp, double lambda) {
  const CholFactor r = cholesky(est_jp, lambda);
  return congruence_norm(r, est_jp.sym() - est_j.sym());
}

bool pairwise_test(const PsdMatrix& est_j, const PsdMatrix& est_jp, double lambda, double eps_j,
                   double eps_jp) {
  return pairwise_statistic(est_j, est_jp, lambda) <= 2.0 * (eps_jp + eps_j);
}

LepskiiSelection lepskii_select(std::span<const PsdMatrix> estimates, std::span<const double> eps,
                                double lambda) {
  const std::size_t levels = estimates.size();
  if (levels == 0) throw InvalidRange("selection needs at least one level");
  if (eps.size() != levels) throw DataError("one error bound per level is required");

  LepskiiSelection sel;
  sel.passed.assign(levels, std::vector<bool>(levels, true));
  for (std::size_t jp = 1; jp < levels; ++jp) {
    const CholFactor r = cholesky(estimates[jp], lambda);
    for (std::size_t j = 0; j < jp; ++j) {
      const double stat = congruence_norm(r, estimates[jp].sym() - estimates[j].sym());
      sel.passed[j][jp] = stat <= 2.0 * (eps[jp] + eps[j]);
    }
  }
  sel.index = levels - 1;
  for (std::size_t j = 0; j < levels; ++j) {
    bool admissible = true;
    for (std::size_t jp = j + 1; jp < levels && admissible; ++jp) admissible = sel.passed[j][jp];
    if (admissible) {
      sel.index = j;
      break;
    }
  }
  return sel;
}

AdaptiveResult run_algorithm2(SampleView x, const AdaptiveConfig& cfg) {
  require_confidence(cfg.delta);
  if (!(cfg.lambda > 0.0)) throw InvalidConfig("regularization level lambda must be positive");
  if (x.rows() == 0) throw DataError("empty sample");

  AdaptiveResult out;
  SampleView main = x;
  if (cfg.upper) {
    out.upper = *cfg.upper;
  } else {
    const std::size_t p = pilot_size(x.rows());
    if (p >= x.rows()) throw SampleTooSmall("sample too small to reserve a pilot subsample");
    out.upper = resolve_upper_from_pilot(x.slice(0, p), cfg.lambda, cfg.delta);
    out.pilot_rows = p;
    main = x.slice(p, x.rows() - p);
  }
  const std::size_t q = halving_steps(cfg.lambda, out.upper) + 1;

  if (cfg.grid) {
    out.grid = *cfg.grid;
  } else {
    AutoGrid ag = auto_grid(main.rows(), q, main.dim(), cfg.delta);
    out.grid = std::move(ag.grid);
    out.auto_cardinality = ag.cardinality;
  }

  const std::size_t levels = out.grid.size();
  const double level_delta = cfg.delta / static_cast<double>(levels);
  out.per_level.resize(levels);
  parallel_for(levels, cfg.threads, [&](std::size_t j) {
    CalibratedConfig c;
    c.delta = level_delta;
    c.lambda = cfg.lambda;
    c.upper = out.upper;
    c.theta = out.grid.levels()[j];
    LevelResult& lr = out.per_level[j];
    lr.theta = out.grid.levels()[j];
    lr.epsilon = epsilon_j(lr.theta, q, main.dim(), cfg.delta, main.rows(), levels);
    lr.run = run_algorithm1(main, c);
  });

  std::vector<PsdMatrix> estimates;
  std::vector<double> eps;
  for (const LevelResult& lr : out.per_level) {
    estimates.push_back(lr.run.estimate);
    eps.push_back(lr.epsilon);
  }
  LepskiiSelection sel = lepskii_select(estimates, eps, cfg.lambda);
  out.selected_index = sel.index;
  out.pairwise_test_log = std::move(sel.passed);
  return out;
}

}  // namespace rcov
