#include "rcov/truncation.hpp"

#include <string>

#include "rcov/error.hpp"
#include "rcov/kernels.hpp"

namespace rcov {

namespace {

double squared_norm(const double* x, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += x[k] * x[k];
  return s;
}

}  // namespace

void require_confidence(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InvalidConfidence("confidence delta must lie in (0, 1], got " + std::to_string(delta));
  }
}

PsdMatrix weighted_covariance(SampleView x, std::span<const double> weights) {
  const std::size_t n = x.rows();
  const std::size_t d = x.dim();
  if (weights.size() != n) throw DataError("weight count does not match observation count");
  if (n == 0) throw DataError("weighted covariance of an empty sample");
  const auto syr = kernels::current().syr_lower;
  std::vector<double> acc(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0)) throw DataError("negative observation weight");
    if (weights[i] == 0.0) continue;
    syr(acc.data(), d, x.row(i), weights[i]);
  }
  const double nn = static_cast<double>(n);
  DenseMatrix lower(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc[i * d + j] / nn;
    }
  }
  return PsdMatrix::by_construction(SymMatrix::from_lower(lower));
}

PsdMatrix sample_covariance(SampleView x) {
  const std::vector<double> ones(x.rows(), 1.0);
  return weighted_covariance(x, ones);
}

WeightedEstimate wei_minsker(SampleView x, double theta) {
  if (!(theta > 0.0)) throw InvalidConfig("truncation level must be positive");
  std::vector<double> w(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) w[i] = rho_sq(squared_norm(x.row(i), x.dim()), theta);
  PsdMatrix est = weighted_covariance(x, w);
  return {std::move(est), std::move(w), theta};
}

double wm_theta(std::size_t n, double w_bar, std::size_t d, double delta) {
  require_confidence(delta);
  if (!(w_bar > 0.0)) throw InvalidConfig("second-moment bound must be positive");
  return std::sqrt(static_cast<double>(n) * w_bar / std::log(2.0 * static_cast<double>(d) / delta));
}

double second_moment_bound(const PsdMatrix& s, double kappa) {
  if (!(kappa >= 1.0)) throw InvalidConfig("kurtosis bound must be >= 1");
  const double norm = spectral_norm(s);
  if (norm == 0.0) throw DegenerateInput("second-moment bound of the zero matrix");
  const double k2 = kappa * kappa;
  return k2 * k2 * norm * norm * effective_rank(s);
}

double empirical_second_moment(SampleView x) {
  std::vector<double> w(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) w[i] = squared_norm(x.row(i), x.dim());
  return spectral_norm(weighted_covariance(x, w));
}

}  // namespace rcov
