#pragma once

// Symmetric and positive-semidefinite matrix primitives. Every expression of
// the form S_lambda^{-1/2} M S_lambda^{-1/2} is realized as R^{-1} M R^{-T}
// with R the Cholesky factor of S + lambda I; the two are similar, so their
// spectra (and spectral norms) coincide.

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace rcov {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

inline constexpr double kTolEig = 1e-10;
inline constexpr double kTolChol = 1e-10;

/// Absolute slack allowed on the minimum eigenvalue in PSD checks.
inline double psd_slack(double norm) { return 1e-9 * (1.0 + norm); }

/// d x d real symmetric matrix. Symmetry is structural: the only way to
/// write an entry writes its mirror too.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t d);

  static SymMatrix identity(std::size_t d);
  static SymMatrix diagonal(const Vector& diag);
  static SymMatrix diagonal(std::initializer_list<double> diag);
  /// Copies the lower triangle of `m` and mirrors it. Throws DataError on a
  /// non-square or non-finite input.
  static SymMatrix from_lower(const DenseMatrix& m);
  /// Symmetric part (m + m^T) / 2.
  static SymMatrix symmetric_part(const DenseMatrix& m);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  void set(std::size_t i, std::size_t j, double v);
  const DenseMatrix& dense() const { return m_; }
  double trace() const { return m_.trace(); }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double c);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

 private:
  DenseMatrix m_;
};

/// Symmetric matrix certified positive semidefinite (up to psd_slack).
class PsdMatrix {
 public:
  PsdMatrix() = default;

  /// Checks the minimum eigenvalue; throws DataError if it is below
  /// -psd_slack(||A||).
  static PsdMatrix certify(SymMatrix a);
  /// For matrices that are PSD by construction: nonnegative weighted sums of
  /// outer products, regularized PSD matrices. Not checked.
  static PsdMatrix by_construction(SymMatrix a) { return PsdMatrix(std::move(a)); }

  const SymMatrix& sym() const { return a_; }
  const DenseMatrix& dense() const { return a_.dense(); }
  std::size_t dim() const { return a_.dim(); }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }
  operator const SymMatrix&() const { return a_; }  // NOLINT(google-explicit-constructor)

 private:
  explicit PsdMatrix(SymMatrix a) : a_(std::move(a)) {}
  SymMatrix a_;
};

/// Lower-triangular R with R R^T = A + lambda I. Storage is column-major.
class CholFactor {
 public:
  CholFactor(DenseMatrix lower, double lambda) : r_(std::move(lower)), lambda_(lambda) {}

  std::size_t dim() const { return static_cast<std::size_t>(r_.rows()); }
  const DenseMatrix& lower() const { return r_; }
  double lambda() const { return lambda_; }

 private:
  DenseMatrix r_;
  double lambda_;
};

/// A + lambda I.
SymMatrix regularize(const SymMatrix& a, double lambda);

/// Cholesky factor of A + lambda I. lambda > 0 guarantees success on a PSD
/// input; lambda = 0 is accepted for positive definite A. Throws
/// FactorizationFailure when a pivot is not strictly positive.
CholFactor cholesky(const PsdMatrix& a, double lambda);

/// R^{-1} x by forward substitution.
Vector whiten(const CholFactor& r, const Vector& x);

/// ||R^{-1} x||^2 through the active SIMD kernel.
double whitened_norm2(const CholFactor& r, const double* x, double* work);

/// whitened_norm2 of `rows` contiguous rows; bit-identical to calling it row by row.
void whitened_norm2_rows(const CholFactor& r, const double* x, std::size_t rows, double* out);

/// Largest absolute eigenvalue.
double spectral_norm(const SymMatrix& a);

/// All eigenvalues, non-increasing.
std::vector<double> sorted_eigenvalues(const SymMatrix& a);

double min_eigenvalue(const SymMatrix& a);

/// ||R^{-1} M R^{-T}|| for symmetric M.
double congruence_norm(const CholFactor& r, const SymMatrix& m);

/// ||S_lambda^{-1/2} (Shat - S) S_lambda^{-1/2}||, lambda > 0.
double calibrated_error(const PsdMatrix& s, const SymMatrix& shat, double lambda);

/// (1 - eps) S_lambda <= Shat_lambda <= (1 + eps) S_lambda in the PSD order.
bool sandwich_check(const PsdMatrix& s, const SymMatrix& shat, double lambda, double eps);

/// tr(S (S + lambda I)^{-1}). At lambda = 0 this is the numerical rank.
double degrees_of_freedom(const PsdMatrix& s, double lambda);

/// Number of eigenvalues above kTolEig * ||S||.
std::size_t numerical_rank(const SymMatrix& s);

/// tr(S) / ||S||. Throws DegenerateInput for S = 0.
double effective_rank(const PsdMatrix& s);

/// [[0, z], [z^T, 0]], dimension d + 1.
SymMatrix hermitian_dilation(const Vector& z);

/// Q psi_theta(Lambda) Q^T for A = Q Lambda Q^T.
SymMatrix spectral_truncate(const SymMatrix& a, double theta);

}  // namespace rcov
