#include "rcov/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "rcov/applications.hpp"
#include "rcov/calibrated.hpp"
#include "rcov/error.hpp"
#include "rcov/parallel.hpp"
#include "rcov/truncation.hpp"

namespace rcov {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point start) {
  return std::chrono::duration<double, std::nano>(Clock::now() - start).count();
}

/// A with A A^T = Sigma: Cholesky when positive definite, otherwise the
/// symmetric square root.
DenseMatrix covariance_root(const PsdMatrix& sigma) {
  Eigen::LLT<DenseMatrix> llt(sigma.dense());
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sigma.dense());
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double mixture_second_moment(const DistributionSpec& s) {
  return (1.0 - s.mix_p) + s.mix_p * s.mix_c * s.mix_c;
}

}  // namespace

DistributionSpec DistributionSpec::gaussian(PsdMatrix sigma, std::uint64_t seed) {
  DistributionSpec s;
  s.family = Family::gaussian;
  s.sigma = std::move(sigma);
  s.seed = seed;
  return s;
}

DistributionSpec DistributionSpec::student_t(double nu, PsdMatrix sigma, std::uint64_t seed) {
  DistributionSpec s = gaussian(std::move(sigma), seed);
  s.family = Family::student_t;
  s.nu = nu;
  return s;
}

DistributionSpec DistributionSpec::scale_mixture(double p, double c, PsdMatrix sigma,
                                                 std::uint64_t seed) {
  DistributionSpec s = gaussian(std::move(sigma), seed);
  s.family = Family::scale_mixture;
  s.mix_p = p;
  s.mix_c = c;
  return s;
}

void validate(const DistributionSpec& spec) {
  if (spec.sigma.dim() == 0) throw InvalidSpec("covariance must have positive dimension");
  switch (spec.family) {
    case Family::gaussian:
      break;
    case Family::student_t:
      if (!(spec.nu > 4.0) || !std::isfinite(spec.nu)) {
        throw InvalidSpec("student_t needs finite nu > 4 for finite fourth moments");
      }
      break;
    case Family::scale_mixture:
      if (!(spec.mix_p >= 0.0 && spec.mix_p <= 1.0) || !(spec.mix_c > 0.0) ||
          !std::isfinite(spec.mix_c)) {
        throw InvalidSpec("scale_mixture needs p in [0, 1] and finite c > 0");
      }
      break;
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampleMatrix sample(const DistributionSpec& spec, std::size_t n) {
  validate(spec);
  const std::size_t d = spec.sigma.dim();
  const DenseMatrix a = covariance_root(spec.sigma);
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(spec.family == Family::student_t ? spec.nu : 1.0);
  std::uniform_real_distribution<double> unif;
  const double mix_norm =
      spec.family == Family::scale_mixture ? 1.0 / std::sqrt(mixture_second_moment(spec)) : 1.0;

  SampleMatrix out(n, d);
  Vector g(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = normal(gen);
    double scale = 1.0;
    switch (spec.family) {
      case Family::gaussian:
        break;
      case Family::student_t:
        scale = std::sqrt((spec.nu - 2.0) / chi2(gen));
        break;
      case Family::scale_mixture:
        scale = (unif(gen) < spec.mix_p ? spec.mix_c : 1.0) * mix_norm;
        break;
    }
    Eigen::Map<Vector>(out.mutable_row(i), static_cast<Eigen::Index>(d)) = (a * g) * scale;
  }
  return out;
}

double kurtosis(const DistributionSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case Family::gaussian:
      return std::pow(3.0, 0.25);
    case Family::student_t:
      return std::pow(3.0 * (spec.nu - 2.0) / (spec.nu - 4.0), 0.25);
    case Family::scale_mixture: {
      const double c2 = spec.mix_c * spec.mix_c;
      const double m2 = mixture_second_moment(spec);
      const double m4 = (1.0 - spec.mix_p) + spec.mix_p * c2 * c2;
      return std::pow(3.0 * m4 / (m2 * m2), 0.25);
    }
  }
  return 0.0;
}

PsdMatrix harmonic_spectrum(std::size_t d) {
  Vector diag(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < diag.size(); ++i) diag(i) = 1.0 / static_cast<double>(i + 1);
  return PsdMatrix::by_construction(SymMatrix::diagonal(diag));
}

std::string EstimatorConfig::name() const {
  switch (kind) {
    case EstimatorKind::algorithm1:
      return "alg1";
    case EstimatorKind::algorithm2:
      return "alg2";
    case EstimatorKind::sample_covariance:
      return "sample";
    case EstimatorKind::wei_minsker:
      return "wm";
  }
  return "unknown";
}

namespace {

struct Estimated {
  PsdMatrix estimate;
  std::optional<double> epsilon;
  std::optional<double> selected_theta;
};

Estimated estimate_once(const DistributionSpec& spec, SampleView x, const EstimatorConfig& cfg) {
  switch (cfg.kind) {
    case EstimatorKind::sample_covariance:
      return {sample_covariance(x), std::nullopt, std::nullopt};
    case EstimatorKind::wei_minsker: {
      const double theta =
          cfg.theta ? *cfg.theta
                    : wm_theta(x.rows(), second_moment_bound(spec.sigma, kurtosis(spec)), x.dim(),
                               cfg.delta);
      return {wei_minsker(x, theta).estimate, std::nullopt, theta};
    }
    case EstimatorKind::algorithm1: {
      CalibratedConfig c;
      c.delta = cfg.delta;
      c.lambda = cfg.lambda;
      c.upper = cfg.upper;
      c.theta = cfg.theta;
      if (!cfg.theta) c.hint = KurtosisDfHint{kurtosis(spec), degrees_of_freedom(spec.sigma, cfg.lambda)};
      CalibratedEstimate ce = run_algorithm1(x, c);
      return {std::move(ce.estimate), ce.epsilon, ce.theta_used};
    }
    case EstimatorKind::algorithm2: {
      AdaptiveConfig c;
      c.delta = cfg.delta;
      c.lambda = cfg.lambda;
      c.upper = cfg.upper;
      c.grid = cfg.grid;
      AdaptiveResult ar = run_algorithm2(x, c);
      const LevelResult& lr = ar.per_level.at(ar.selected_index);
      return {lr.run.estimate, lr.epsilon, lr.theta};
    }
  }
  throw InvalidConfig("unknown estimator");
}

}  // namespace

std::vector<TrialReport> run_campaign(const DistributionSpec& spec, std::size_t n,
                                      std::span<const EstimatorConfig> estimators,
                                      std::size_t trials, std::size_t parallelism) {
  validate(spec);
  if (trials == 0) throw InvalidConfig("need at least one trial");
  if (estimators.empty()) throw InvalidConfig("need at least one estimator");
  const std::size_t per = estimators.size();
  const std::vector<double> truth = sorted_eigenvalues(spec.sigma);
  std::vector<TrialReport> reports(trials * per);

  parallel_for(trials, parallelism, [&](std::size_t t) {
    DistributionSpec trial_spec = spec;
    trial_spec.seed = derive_seed(spec.seed, t);
    const auto t0 = Clock::now();
    const SampleMatrix x = sample(trial_spec, n);
    const double sample_ns = elapsed_ns(t0);

    for (std::size_t e = 0; e < per; ++e) {
      const EstimatorConfig& cfg = estimators[e];
      TrialReport& rep = reports[t * per + e];
      rep.trial = t;
      rep.seed = trial_spec.seed;
      rep.estimator = cfg.name();
      rep.timing.sample_ns = sample_ns;
      try {
        const auto t1 = Clock::now();
        Estimated est = estimate_once(spec, x, cfg);
        rep.timing.estimate_ns = elapsed_ns(t1);

        const auto t2 = Clock::now();
        rep.calibrated_error = calibrated_error(spec.sigma, est.estimate, cfg.lambda);
        rep.epsilon = est.epsilon;
        rep.selected_theta = est.selected_theta;
        const std::vector<double> eig = sorted_eigenvalues(est.estimate);
        std::vector<std::size_t> covered;
        for (std::size_t i = 0; i < truth.size(); ++i) {
          rep.eigen_relative_errors.push_back(truth[i] > 0.0 ? std::abs(eig[i] - truth[i]) / truth[i]
                                                             : std::abs(eig[i]));
          if (truth[i] >= cfg.lambda) covered.push_back(i);
        }
        if (est.epsilon) {
          const double eps = *est.epsilon;
          rep.certificate_pass = rep.calibrated_error <= eps;
          rep.sandwich_pass = std::isinf(eps) || sandwich_check(spec.sigma, est.estimate, cfg.lambda, eps);
          rep.eigen_bounds_pass = std::isinf(eps) || eigenvalue_bounds_hold(truth, eig, eps, covered);
        }
        rep.timing.metrics_ns = elapsed_ns(t2);
        rep.ok = true;
      } catch (const Error& err) {
        rep.ok = false;
        rep.error = err.what();
      }
    }
  });
  return reports;
}

std::vector<TrialReport> run_trials(const DistributionSpec& spec, std::size_t n,
                                    const EstimatorConfig& estimator, std::size_t trials,
                                    std::size_t parallelism) {
  return run_campaign(spec, n, std::span<const EstimatorConfig>(&estimator, 1), trials, parallelism);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidRange("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<CoverageSummary> coverage_report(std::span<const TrialReport> reports) {
  if (reports.empty()) throw DataError("coverage report of an empty campaign");
  std::vector<std::string> names;
  for (const TrialReport& r : reports) {
    if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
  }
  std::vector<CoverageSummary> out;
  for (const std::string& name : names) {
    CoverageSummary s;
    s.estimator = name;
    std::vector<double> errors;
    std::size_t pass = 0, sandwich = 0, eigen = 0;
    for (const TrialReport& r : reports) {
      if (r.estimator != name) continue;
      ++s.trials;
      if (!r.ok) {
        ++s.failures;
        continue;
      }
      errors.push_back(r.calibrated_error);
      pass += r.certificate_pass;
      sandwich += r.sandwich_pass;
      eigen += r.eigen_bounds_pass;
      s.mean_timing.sample_ns += r.timing.sample_ns;
      s.mean_timing.estimate_ns += r.timing.estimate_ns;
      s.mean_timing.metrics_ns += r.timing.metrics_ns;
    }
    if (!errors.empty()) {
      const double ok = static_cast<double>(errors.size());
      s.pass_fraction = static_cast<double>(pass) / ok;
      s.sandwich_fraction = static_cast<double>(sandwich) / ok;
      s.eigen_fraction = static_cast<double>(eigen) / ok;
      s.error_q50 = quantile(errors, 0.5);
      s.error_q90 = quantile(errors, 0.9);
      s.error_q95 = quantile(errors, 0.95);
      s.mean_timing.sample_ns /= ok;
      s.mean_timing.estimate_ns /= ok;
      s.mean_timing.metrics_ns /= ok;
    }
    out.push_back(std::move(s));
  }
  return out;
}

ComplexityTable complexity_probe(const DistributionSpec& spec, std::span<const std::size_t> n_list,
                                 const EstimatorConfig& config, std::size_t repeats) {
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw InvalidRange("complexity probe needs increasing sample sizes");
  }
  ComplexityTable table;
  for (std::size_t n : n_list) {
    DistributionSpec s = spec;
    s.seed = derive_seed(spec.seed, n);
    const SampleMatrix x = sample(s, n);
    double best = HUGE_VAL;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
      const auto t0 = Clock::now();
      (void)estimate_once(spec, x, config);
      best = std::min(best, elapsed_ns(t0) * 1e-9);
    }
    table.rows.push_back({n, spec.sigma.dim(), best});
  }
  if (table.rows.size() >= 2) {
    double mn = 0.0, mt = 0.0;
    for (const auto& r : table.rows) {
      mn += static_cast<double>(r.n);
      mt += r.seconds;
    }
    mn /= static_cast<double>(table.rows.size());
    mt /= static_cast<double>(table.rows.size());
    double sxy = 0.0, sxx = 0.0;
    for (const auto& r : table.rows) {
      const double dx = static_cast<double>(r.n) - mn;
      sxy += dx * (r.seconds - mt);
      sxx += dx * dx;
    }
    table.slope_seconds_per_obs = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return table;
}

}  // namespace rcov
