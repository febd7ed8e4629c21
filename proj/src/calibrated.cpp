#include "rcov/calibrated.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rcov/error.hpp"

namespace rcov {

namespace {

double log_ratio(double num, double delta) { return std::log(num / delta); }

void require_schedule(double lambda, double upper) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidConfig("regularization level lambda must be positive and finite");
  }
  if (!(upper >= lambda) || !std::isfinite(upper)) {
    throw InvalidConfig("upper bound L must be finite and satisfy lambda <= L");
  }
}

double squared_norm(const double* x, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += x[k] * x[k];
  return s;
}

}  // namespace

std::size_t halving_steps(double lambda, double upper) {
  require_schedule(lambda, upper);
  // Relative slack so that ratios like 0.8 / 0.1 land on the power of two.
  const double target = upper * (1.0 - 1e-12);
  std::size_t t = 0;
  while (std::ldexp(lambda, static_cast<int>(t)) < target) ++t;
  return t;
}

BatchPlan plan_batches(std::size_t n, double lambda, double upper, bool enforce_min) {
  BatchPlan plan;
  plan.iterations = halving_steps(lambda, upper);
  plan.levels = plan.iterations + 1;
  plan.n = n;
  if (enforce_min && n < 4 * plan.levels) {
    throw SampleTooSmall("need n >= 4q = " + std::to_string(4 * plan.levels) + " observations, got " +
                         std::to_string(n));
  }
  plan.batch_size = n / (2 * plan.levels);
  plan.final_size = n - plan.batch_size * plan.levels;
  plan.ranges.reserve(plan.levels + 1);
  for (std::size_t t = 0; t < plan.levels; ++t) {
    plan.ranges.push_back({t * plan.batch_size, (t + 1) * plan.batch_size});
  }
  plan.ranges.push_back({plan.batch_size * plan.levels, n});
  return plan;
}

double theta_star(std::size_t n, std::size_t d, double delta, double lambda, double upper,
                  double kappa, double df_lambda) {
  require_confidence(delta);
  if (!(kappa > 0.0) || !(df_lambda > 0.0)) {
    throw InvalidConfig("kurtosis and degrees of freedom must be positive");
  }
  const double q = static_cast<double>(halving_steps(lambda, upper) + 1);
  const double dd = static_cast<double>(d);
  return 2.0 * kappa * kappa *
         std::sqrt(static_cast<double>(n) * df_lambda / (q * log_ratio(4.0 * q * dd, delta)));
}

std::size_t min_sample_size(double theta, std::size_t q, std::size_t d, double delta) {
  // Advisory only, so any positive delta is evaluated.
  if (!(delta > 0.0)) throw InvalidConfidence("confidence delta must be positive");
  const double qq = static_cast<double>(q);
  const double need = 48.0 * qq * theta * log_ratio(4.0 * qq * static_cast<double>(d), delta);
  if (!std::isfinite(need)) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::ceil(need));
}

double final_theta(double theta, std::size_t iterations, std::size_t d, double delta) {
  require_confidence(delta);
  const double q = static_cast<double>(iterations + 1);
  const double base = log_ratio(4.0 * static_cast<double>(d), delta);
  return 2.0 * theta * std::sqrt(q) * std::sqrt(1.0 + std::log(q) / base);
}

double error_bound(double theta, std::size_t q, std::size_t d, double delta, std::size_t n) {
  require_confidence(delta);
  const double qq = static_cast<double>(q);
  const double dd = static_cast<double>(d);
  return 24.0 * theta *
         std::sqrt(qq * log_ratio(4.0 * qq * dd, delta) * log_ratio(4.0 * dd, delta)) /
         static_cast<double>(n);
}

WeightedEstimate initial_estimate(SampleView batch0, double upper, double theta) {
  if (!(upper > 0.0)) throw InvalidConfig("upper bound L must be positive");
  if (!(theta > 0.0)) throw InvalidConfig("truncation level must be positive");
  std::vector<double> w(batch0.rows());
  for (std::size_t i = 0; i < batch0.rows(); ++i) {
    w[i] = rho_sq(squared_norm(batch0.row(i), batch0.dim()) / upper, theta);
  }
  PsdMatrix est = weighted_covariance(batch0, w);
  return {std::move(est), std::move(w), theta};
}

WeightedEstimate refine_step(const PsdMatrix& current, double lambda_t, SampleView batch,
                             double theta) {
  if (!(theta > 0.0)) throw InvalidConfig("truncation level must be positive");
  if (current.dim() != batch.dim()) throw DataError("refine_step: dimension mismatch");
  const CholFactor r = cholesky(current, lambda_t);
  std::vector<double> w(batch.rows());
  if (batch.rows() > 0) whitened_norm2_rows(r, batch.row(0), batch.rows(), w.data());
  for (double& wi : w) wi = rho_sq(wi, theta);
  PsdMatrix est = weighted_covariance(batch, w);
  return {std::move(est), std::move(w), theta};
}

std::size_t pilot_size(std::size_t n) { return std::max<std::size_t>(1, n / 8); }

double resolve_upper_from_pilot(SampleView pilot, double lambda, double delta) {
  if (pilot.rows() == 0) throw SampleTooSmall("empty pilot subsample");
  const double w_bar = empirical_second_moment(pilot);
  if (!(w_bar > 0.0)) throw DegenerateInput("pilot subsample is identically zero");
  const double theta = wm_theta(pilot.rows(), w_bar, pilot.dim(), delta);
  const double norm = spectral_norm(wei_minsker(pilot, theta).estimate);
  if (!(lambda <= (2.0 / 3.0) * norm)) {
    throw InvalidConfig("lambda exceeds 2/3 of the pilot spectral norm estimate (" +
                        std::to_string(norm) + "); lower lambda or pass L explicitly");
  }
  return 2.0 * norm;
}

double estimate_kurtosis(SampleView x, std::size_t random_dirs, std::uint64_t seed) {
  const std::size_t d = x.dim();
  std::vector<Vector> dirs;
  for (std::size_t k = 0; k < d; ++k) dirs.push_back(Vector::Unit(static_cast<Eigen::Index>(d),
                                                                   static_cast<Eigen::Index>(k)));
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  for (std::size_t j = 0; j < random_dirs; ++j) {
    Vector u(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = normal(gen);
    dirs.push_back(std::move(u));
  }
  double best = 1.0;
  for (const Vector& u : dirs) {
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double p = Eigen::Map<const Vector>(x.row(i), static_cast<Eigen::Index>(d)).dot(u);
      const double p2 = p * p;
      m2 += p2;
      m4 += p2 * p2;
    }
    if (m2 <= 0.0) continue;
    const double nn = static_cast<double>(x.rows());
    best = std::max(best, std::pow(m4 / nn, 0.25) / std::sqrt(m2 / nn));
  }
  return best;
}

CalibratedEstimate run_algorithm1(SampleView x, const CalibratedConfig& cfg) {
  require_confidence(cfg.delta);
  if (x.rows() == 0 || x.dim() == 0) throw DataError("empty sample");
  if (!(cfg.lambda > 0.0)) throw InvalidConfig("regularization level lambda must be positive");

  CalibratedEstimate out;
  out.delta = cfg.delta;
  out.lambda = cfg.lambda;
  out.dim = x.dim();

  SampleView main = x;
  if (cfg.upper) {
    out.upper = *cfg.upper;
  } else {
    const std::size_t p = pilot_size(x.rows());
    if (p >= x.rows()) throw SampleTooSmall("sample too small to reserve a pilot subsample");
    out.upper = resolve_upper_from_pilot(x.slice(0, p), cfg.lambda, cfg.delta);
    out.upper_from_pilot = true;
    out.pilot_rows = p;
    main = x.slice(p, x.rows() - p);
  }
  require_schedule(cfg.lambda, out.upper);

  out.plan = plan_batches(main.rows(), cfg.lambda, out.upper);
  const BatchPlan& plan = out.plan;
  const std::size_t n = main.rows();
  const std::size_t d = main.dim();
  const auto batch = [&](const BatchRange& br) { return main.slice(br.begin, br.size()); };

  if (cfg.theta) {
    out.theta_used = *cfg.theta;
  } else if (cfg.hint) {
    out.kappa_used = cfg.hint->kappa;
    out.df_used = cfg.hint->df_lambda;
    out.theta_used =
        theta_star(n, d, cfg.delta, cfg.lambda, out.upper, cfg.hint->kappa, cfg.hint->df_lambda);
  } else {
    const SampleView b0 = batch(plan.batch(0));
    const std::size_t quarter = b0.rows() / 4;
    const SampleView held_out = quarter > 0 ? b0.slice(b0.rows() - quarter, quarter) : b0;
    const double kappa = estimate_kurtosis(held_out, 100, cfg.seed);
    const double df = std::max(1.0, degrees_of_freedom(sample_covariance(b0), cfg.lambda));
    out.kappa_used = kappa;
    out.df_used = df;
    out.theta_used = theta_star(n, d, cfg.delta, cfg.lambda, out.upper, kappa, df);
  }
  if (!(out.theta_used > 0.0)) throw InvalidConfig("truncation level must be positive");

  out.theta_final = final_theta(out.theta_used, plan.iterations, d, cfg.delta);
  out.epsilon = error_bound(out.theta_used, plan.levels, d, cfg.delta, n);
  out.advisory_min_n = min_sample_size(out.theta_used, plan.levels, d, cfg.delta);
  if (n < out.advisory_min_n) {
    out.warnings.push_back("sample size " + std::to_string(n) +
                           " is below the sufficient size " + std::to_string(out.advisory_min_n) +
                           " for the error certificate");
  }

  double lambda_t = out.upper;
  out.lambda_schedule.push_back(lambda_t);
  PsdMatrix current = initial_estimate(batch(plan.batch(0)), out.upper, out.theta_used).estimate;
  if (cfg.keep_intermediates) out.intermediate_estimates.push_back(current);
  for (std::size_t t = 0; t < plan.iterations; ++t) {
    current = refine_step(current, lambda_t, batch(plan.batch(t + 1)), out.theta_used).estimate;
    if (cfg.keep_intermediates) out.intermediate_estimates.push_back(current);
    lambda_t /= 2.0;
    out.lambda_schedule.push_back(lambda_t);
  }

  WeightedEstimate fin = refine_step(current, lambda_t, batch(plan.final_batch()), out.theta_final);
  out.estimate = std::move(fin.estimate);
  out.final_weights = std::move(fin.weights);
  return out;
}

}  // namespace rcov
