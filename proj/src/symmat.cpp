#include "rcov/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rcov/error.hpp"
#include "rcov/kernels.hpp"
#include "rcov/truncation.hpp"

namespace rcov {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vector eigenvalues_ascending(const SymMatrix& a) {
  if (a.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a.dense(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DataError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
}

}  // namespace

SymMatrix::SymMatrix(std::size_t d) : m_(DenseMatrix::Zero(idx(d), idx(d))) {}

SymMatrix SymMatrix::identity(std::size_t d) {
  SymMatrix s;
  s.m_ = DenseMatrix::Identity(idx(d), idx(d));
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  if (!diag.allFinite()) throw DataError("non-finite diagonal entry");
  SymMatrix s;
  s.m_ = diag.asDiagonal();
  return s;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
  Vector v(static_cast<Eigen::Index>(diag.size()));
  Eigen::Index i = 0;
  for (double x : diag) v(i++) = x;
  return diagonal(v);
}

SymMatrix SymMatrix::from_lower(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw DataError("symmetric matrix must be square");
  SymMatrix s;
  s.m_ = m.triangularView<Eigen::Lower>();
  s.m_.triangularView<Eigen::StrictlyUpper>() = s.m_.transpose();
  if (!s.m_.allFinite()) throw DataError("non-finite matrix entry");
  return s;
}

SymMatrix SymMatrix::symmetric_part(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw DataError("symmetric matrix must be square");
  return from_lower(0.5 * (m + m.transpose()));
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  m_(idx(i), idx(j)) = v;
  m_(idx(j), idx(i)) = v;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  require_same_dim(*this, o);
  m_ += o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  require_same_dim(*this, o);
  m_ -= o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double c) {
  m_ *= c;
  return *this;
}

PsdMatrix PsdMatrix::certify(SymMatrix a) {
  const Vector ev = eigenvalues_ascending(a);
  if (ev.size() > 0) {
    const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    if (ev(0) < -psd_slack(norm)) {
      throw DataError("matrix is not positive semidefinite (min eigenvalue " +
                      std::to_string(ev(0)) + ")");
    }
  }
  return PsdMatrix(std::move(a));
}

SymMatrix regularize(const SymMatrix& a, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidConfig("regularization level must be finite and nonnegative");
  }
  SymMatrix out = a;
  for (std::size_t i = 0; i < a.dim(); ++i) out.set(i, i, a(i, i) + lambda);
  return out;
}

CholFactor cholesky(const PsdMatrix& a, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidConfig("Cholesky regularization must be nonnegative");
  const std::size_t d = a.dim();
  DenseMatrix r = DenseMatrix::Zero(idx(d), idx(d));
  const DenseMatrix& m = a.dense();
  // Column-oriented (left-looking) factorization.
  for (std::size_t j = 0; j < d; ++j) {
    const Eigen::Index jj = idx(j);
    double pivot = m(jj, jj) + lambda;
    for (Eigen::Index k = 0; k < jj; ++k) pivot -= r(jj, k) * r(jj, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw FactorizationFailure("non-positive pivot at column " + std::to_string(j));
    }
    const double rjj = std::sqrt(pivot);
    r(jj, jj) = rjj;
    for (Eigen::Index i = jj + 1; i < idx(d); ++i) {
      double s = m(i, jj);
      for (Eigen::Index k = 0; k < jj; ++k) s -= r(i, k) * r(jj, k);
      r(i, jj) = s / rjj;
    }
  }
  return CholFactor(std::move(r), lambda);
}

Vector whiten(const CholFactor& r, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != r.dim()) throw DataError("whiten: dimension mismatch");
  return r.lower().triangularView<Eigen::Lower>().solve(x);
}

double whitened_norm2(const CholFactor& r, const double* x, double* work) {
  return kernels::current().whitened_norm2(r.lower().data(), r.dim(), x, work);
}

void whitened_norm2_rows(const CholFactor& r, const double* x, std::size_t rows, double* out) {
  std::vector<double> work(kernels::kRowBlock * r.dim());
  kernels::current().whitened_norm2_rows(r.lower().data(), r.dim(), x, rows, out, work.data());
}

double spectral_norm(const SymMatrix& a) {
  const Vector ev = eigenvalues_ascending(a);
  if (ev.size() == 0) return 0.0;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

std::vector<double> sorted_eigenvalues(const SymMatrix& a) {
  const Vector ev = eigenvalues_ascending(a);
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::reverse(out.begin(), out.end());
  return out;
}

double min_eigenvalue(const SymMatrix& a) {
  const Vector ev = eigenvalues_ascending(a);
  if (ev.size() == 0) return 0.0;
  return ev(0);
}

double congruence_norm(const CholFactor& r, const SymMatrix& m) {
  if (m.dim() != r.dim()) throw DataError("congruence: dimension mismatch");
  const auto lower = r.lower().triangularView<Eigen::Lower>();
  // R^{-1} M, then (R^{-1} (R^{-1} M)^T)^T = R^{-1} M R^{-T}.
  DenseMatrix left = lower.solve(m.dense());
  DenseMatrix both = lower.solve(left.transpose());
  return spectral_norm(SymMatrix::symmetric_part(both));
}

double calibrated_error(const PsdMatrix& s, const SymMatrix& shat, double lambda) {
  require_same_dim(s, shat);
  const CholFactor r = cholesky(s, lambda);
  return congruence_norm(r, shat - s.sym());
}

bool sandwich_check(const PsdMatrix& s, const SymMatrix& shat, double lambda, double eps) {
  require_same_dim(s, shat);
  if (!(eps >= 0.0)) throw InvalidEpsilon("sandwich_check: eps must be nonnegative");
  const SymMatrix s_l = regularize(s, lambda);
  const SymMatrix shat_l = regularize(shat, lambda);
  const double slack = psd_slack(spectral_norm(s_l) + spectral_norm(shat_l));
  const SymMatrix lower_gap = shat_l - (1.0 - eps) * s_l;
  const SymMatrix upper_gap = (1.0 + eps) * s_l - shat_l;
  return min_eigenvalue(lower_gap) >= -slack && min_eigenvalue(upper_gap) >= -slack;
}

std::size_t numerical_rank(const SymMatrix& s) {
  const Vector ev = eigenvalues_ascending(s);
  if (ev.size() == 0) return 0;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > kTolEig * norm) ++rank;
  }
  return rank;
}

double degrees_of_freedom(const PsdMatrix& s, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidConfig("degrees_of_freedom: lambda must be nonnegative");
  if (lambda == 0.0) return static_cast<double>(numerical_rank(s));
  const Vector ev = eigenvalues_ascending(s);
  double df = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double sigma = std::max(ev(i), 0.0);
    df += sigma / (sigma + lambda);
  }
  return df;
}

double effective_rank(const PsdMatrix& s) {
  const double norm = spectral_norm(s);
  if (norm == 0.0) throw DegenerateInput("effective rank of the zero matrix");
  return s.sym().trace() / norm;
}

SymMatrix hermitian_dilation(const Vector& z) {
  const std::size_t d = static_cast<std::size_t>(z.size());
  SymMatrix h(d + 1);
  for (std::size_t i = 0; i < d; ++i) h.set(i, d, z(idx(i)));
  return h;
}

SymMatrix spectral_truncate(const SymMatrix& a, double theta) {
  if (!(theta > 0.0)) throw InvalidConfig("spectral_truncate: theta must be positive");
  if (a.dim() == 0) return a;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a.dense());
  Vector clipped = es.eigenvalues();
  for (Eigen::Index i = 0; i < clipped.size(); ++i) clipped(i) = psi(clipped(i), theta);
  const DenseMatrix& q = es.eigenvectors();
  return SymMatrix::symmetric_part(q * clipped.asDiagonal() * q.transpose());
}

}  // namespace rcov
