#include "rcov/applications.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rcov/calibrated.hpp"
#include "rcov/error.hpp"
#include "rcov/truncation.hpp"

namespace rcov {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

DenseMatrix thin_q(const DenseMatrix& a) {
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  return qr.householderQ() * DenseMatrix::Identity(a.rows(), a.cols());
}

double operator_norm(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, spectral_norm(SymMatrix::symmetric_part(m.transpose() * m))));
}

}  // namespace

EigenReport eigenvalue_intervals(const PsdMatrix& shat, double eps, std::size_t k) {
  if (!(eps >= 0.0 && eps < 0.5)) throw InvalidEpsilon("eigenvalue intervals need 0 <= eps < 1/2");
  if (k < 1 || k > shat.dim()) throw InvalidRange("k must lie in [1, d]");
  EigenReport rep;
  rep.eigenvalues = sorted_eigenvalues(shat);
  rep.epsilon = eps;
  rep.radius = 2.0 * eps;
  rep.k = k;
  const double lo = 1.0 - 2.0 * eps;
  const double hi = 1.0 + 2.0 * eps;
  const double lk = rep.eigenvalues[k - 1];
  for (std::size_t i = 0; i < k; ++i) {
    const double li = rep.eigenvalues[i];
    rep.intervals.emplace_back(li / hi, li / lo);
    if (lk > 0.0) {
      rep.ratio_intervals.emplace_back(lo * lo * li / lk, li / lk / (lo * lo));
    } else {
      rep.ratio_intervals.emplace_back(0.0, HUGE_VAL);
    }
  }
  return rep;
}

bool eigenvalue_bounds_hold(std::span<const double> truth, std::span<const double> estimate,
                            double eps, std::span<const std::size_t> indices) {
  for (std::size_t i : indices) {
    if (i >= truth.size() || i >= estimate.size()) throw InvalidRange("eigenvalue index out of range");
    if (estimate[i] < (1.0 - 2.0 * eps) * truth[i]) return false;
    if (estimate[i] > (1.0 + 2.0 * eps) * truth[i]) return false;
  }
  return true;
}

SubspaceResult subspace_iteration(const PsdMatrix& shat, std::size_t k, const SubspaceOptions& opts) {
  const std::size_t d = shat.dim();
  if (k < 1 || k > d) throw InvalidRange("k must lie in [1, d]");
  DenseMatrix u0;
  if (opts.initial) {
    u0 = *opts.initial;
    if (u0.rows() != idx(d) || u0.cols() != idx(k)) throw DataError("initial block must be d x k");
  } else {
    std::mt19937_64 gen(opts.seed);
    std::normal_distribution<double> normal;
    u0.resize(idx(d), idx(k));
    for (Eigen::Index j = 0; j < u0.cols(); ++j) {
      for (Eigen::Index i = 0; i < u0.rows(); ++i) u0(i, j) = normal(gen);
    }
  }
  const DenseMatrix& s = shat.dense();
  SubspaceResult res;
  res.basis = thin_q(u0);
  for (std::size_t it = 0;; ++it) {
    const DenseMatrix su = s * res.basis;
    res.residual = operator_norm(su - res.basis * (res.basis.transpose() * su));
    res.iterations = it;
    if (res.residual <= opts.tol) {
      res.converged = true;
      break;
    }
    if (it == opts.max_iters) break;
    res.basis = thin_q(su);
  }
  return res;
}

double ridge_theta_bar(std::size_t n, double kappa, double response_kurtosis, double v2,
                       double df_lambda, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfidence("ridge truncation needs delta in (0, 1)");
  if (!(kappa > 0.0) || !(response_kurtosis > 0.0) || !(v2 > 0.0) || !(df_lambda > 0.0)) {
    throw InvalidConfig("ridge moment parameters must be positive");
  }
  return std::sqrt(static_cast<double>(n) * kappa * kappa * response_kurtosis * response_kurtosis *
                   v2 * df_lambda / std::log(1.0 / delta));
}

Vector truncated_mean(std::span<const Vector> z, double theta) {
  if (!(theta > 0.0)) throw InvalidConfig("truncation level must be positive");
  if (z.empty()) throw DataError("truncated mean of an empty list");
  Vector acc = Vector::Zero(z.front().size());
  for (const Vector& zi : z) {
    const double norm = zi.norm();
    const double w = norm > theta ? theta / norm : 1.0;
    acc += w * zi;
  }
  return acc / static_cast<double>(z.size());
}

Vector dilation_mean(std::span<const Vector> z, double theta) {
  if (!(theta > 0.0)) throw InvalidConfig("truncation level must be positive");
  if (z.empty()) throw DataError("dilation mean of an empty list");
  const Eigen::Index d = z.front().size();
  DenseMatrix acc = DenseMatrix::Zero(d + 1, d + 1);
  for (const Vector& zi : z) acc += spectral_truncate(hermitian_dilation(zi), theta).dense();
  acc /= static_cast<double>(z.size());
  return acc.col(d).head(d);
}

RidgeEstimate robust_ridge(SampleView x, std::span<const double> y, const PsdMatrix& shat,
                           const RidgeConfig& cfg) {
  if (y.size() != x.rows()) {
    throw DataError("response count " + std::to_string(y.size()) + " does not match " +
                    std::to_string(x.rows()) + " design rows");
  }
  if (x.rows() == 0) throw DataError("ridge regression on an empty sample");
  if (shat.dim() != x.dim()) throw DataError("covariance estimate dimension mismatch");

  CholFactor factor = cholesky(shat, cfg.lambda);
  double theta = 0.0;
  if (cfg.theta_bar) {
    theta = *cfg.theta_bar;
  } else {
    const double df = cfg.df_lambda ? *cfg.df_lambda
                                     : std::max(1.0, degrees_of_freedom(shat, cfg.lambda));
    theta = ridge_theta_bar(x.rows(), cfg.kappa, cfg.response_kurtosis, cfg.response_second_moment,
                            df, cfg.delta);
  }
  if (!(theta > 0.0)) throw InvalidConfig("truncation level must be positive");

  const auto lower = factor.lower().triangularView<Eigen::Lower>();
  const Eigen::Index d = static_cast<Eigen::Index>(x.dim());
  Vector acc = Vector::Zero(d);
  std::vector<double> tw(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Vector zi = lower.solve(x.row_vector(i) * y[i]);
    const double norm = zi.norm();
    tw[i] = norm > theta ? theta / norm : 1.0;
    acc += tw[i] * zi;
  }
  Vector zbar = acc / static_cast<double>(x.rows());
  Vector w = lower.transpose().solve(zbar);
  return {std::move(w), std::move(zbar), std::move(tw), shat, std::move(factor), theta, x.rows()};
}

Vector ordinary_ridge(SampleView x, std::span<const double> y, double lambda) {
  if (y.size() != x.rows()) throw DataError("response count does not match design rows");
  const PsdMatrix cov = sample_covariance(x);
  Vector moment = Vector::Zero(static_cast<Eigen::Index>(x.dim()));
  for (std::size_t i = 0; i < x.rows(); ++i) moment += x.row_vector(i) * y[i];
  moment /= static_cast<double>(x.rows());
  const CholFactor r = cholesky(cov, lambda);
  const auto lower = r.lower().triangularView<Eigen::Lower>();
  return lower.transpose().solve(lower.solve(moment));
}

double excess_risk(const Vector& w, const Vector& w_star, const PsdMatrix& s) {
  if (w.size() != w_star.size() || static_cast<std::size_t>(w.size()) != s.dim()) {
    throw DataError("excess_risk: dimension mismatch");
  }
  const Vector diff = w - w_star;
  return diff.dot(s.dense() * diff);
}

RidgeMoments estimate_ridge_moments(SampleView x, std::span<const double> y, std::uint64_t seed) {
  if (y.size() != x.rows() || y.empty()) throw DataError("response count does not match design rows");
  RidgeMoments m;
  m.kappa = estimate_kurtosis(x, 100, seed);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : y) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  const double n = static_cast<double>(y.size());
  m.response_second_moment = m2 / n;
  if (m2 > 0.0) m.response_kurtosis = std::max(1.0, std::pow(m4 / n, 0.25) / std::sqrt(m2 / n));
  if (!(m.response_second_moment > 0.0)) throw DegenerateInput("responses are identically zero");
  return m;
}

}  // namespace rcov
