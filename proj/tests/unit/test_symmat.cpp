#include <cmath>
#include <random>

#include "doctest.h"
#include "rcov/error.hpp"
#include "rcov/symmat.hpp"
#include "support.hpp"

using namespace rcov;
using doctest::Approx;

namespace {

PsdMatrix diag(std::initializer_list<double> v) {
  return PsdMatrix::certify(SymMatrix::diagonal(v));
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("SymMatrix storage is symmetric") {
  SymMatrix a(3);
  a.set(0, 2, 5.0);
  CHECK(a(2, 0) == 5.0);
  DenseMatrix m(2, 2);
  m << 1.0, 99.0, 2.0, 3.0;
  const SymMatrix b = SymMatrix::from_lower(m);
  CHECK(b(0, 1) == 2.0);
  CHECK(b(1, 0) == 2.0);
}

TEST_CASE("SymMatrix rejects non-finite entries") {
  DenseMatrix m = DenseMatrix::Identity(2, 2);
  m(1, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix::from_lower(m), DataError);
}

TEST_CASE("PsdMatrix certification") {
  CHECK_NOTHROW(PsdMatrix::certify(SymMatrix::diagonal({1.0, 0.0})));
  CHECK_THROWS_AS(PsdMatrix::certify(SymMatrix::diagonal({1.0, -0.1})), DataError);
  // Within the slack of 1e-9 (1 + ||A||).
  CHECK_NOTHROW(PsdMatrix::certify(SymMatrix::diagonal({1.0, -1e-10})));
}

TEST_CASE("regularize") {
  CHECK(regularize(SymMatrix(2), 1.0) == SymMatrix::identity(2));
  CHECK(regularize(SymMatrix::diagonal({4.0, 1.0}), 0.0) == SymMatrix::diagonal({4.0, 1.0}));
  CHECK(regularize(SymMatrix::diagonal({4.0, 1.0}), 0.5) == SymMatrix::diagonal({4.5, 1.5}));
}

TEST_CASE("cholesky examples") {
  const CholFactor r = cholesky(diag({3.0, 0.0}), 1.0);
  CHECK(r.lower()(0, 0) == Approx(2.0));
  CHECK(r.lower()(1, 1) == Approx(1.0));
  CHECK(r.lower()(1, 0) == 0.0);

  const CholFactor z = cholesky(PsdMatrix::certify(SymMatrix(4)), 4.0);
  CHECK((z.lower() - 2.0 * DenseMatrix::Identity(4, 4)).norm() < 1e-15);

  std::mt19937_64 gen(1);
  const DenseMatrix g = test::gaussian_matrix(gen, 5, 5);
  const PsdMatrix a = PsdMatrix::certify(SymMatrix::symmetric_part(g.transpose() * g));
  const CholFactor rr = cholesky(a, 0.1);
  const DenseMatrix target = a.dense() + 0.1 * DenseMatrix::Identity(5, 5);
  CHECK((rr.lower() * rr.lower().transpose() - target).norm() <= 1e-10 * target.norm());
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(rr.lower()(i, i) > 0.0);
}

TEST_CASE("cholesky fails on a non-positive pivot") {
  // Bypasses certification to simulate an upstream invariant violation.
  const PsdMatrix bad = PsdMatrix::by_construction(SymMatrix::diagonal({1.0, -2.0}));
  CHECK_THROWS_AS(cholesky(bad, 1.0), FactorizationFailure);
  CHECK_THROWS_AS(cholesky(diag({1.0, 0.0}), 0.0), FactorizationFailure);
}

TEST_CASE("whiten examples") {
  const Vector x = vec({4.0, 6.0});
  CHECK(whiten(cholesky(PsdMatrix::certify(SymMatrix(2)), 1.0), x) == x);
  const Vector h = whiten(cholesky(PsdMatrix::certify(SymMatrix(2)), 4.0), x);
  CHECK(h(0) == Approx(2.0));
  CHECK(h(1) == Approx(3.0));
  const Vector w = whiten(cholesky(diag({3.0, 0.0}), 1.0), vec({2.0, 1.0}));
  CHECK(w(0) == Approx(1.0));
  CHECK(w(1) == Approx(1.0));
}

TEST_CASE("whiten round trip against the explicit inverse") {
  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 50; ++rep) {
    const PsdMatrix a = test::random_psd(gen, 6, 3);
    const double lambda = 0.01 + 0.5 * rep / 50.0;
    const CholFactor r = cholesky(a, lambda);
    const Vector x = test::gaussian_matrix(gen, 6, 1).col(0);
    const DenseMatrix al = a.dense() + lambda * DenseMatrix::Identity(6, 6);
    const double want = x.dot(al.ldlt().solve(x));
    CHECK(whiten(r, x).squaredNorm() == Approx(want).epsilon(1e-8));
    std::vector<double> work(6);
    CHECK(whitened_norm2(r, x.data(), work.data()) == Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("spectral_norm examples") {
  CHECK(spectral_norm(SymMatrix::diagonal({4.0, -7.0, 1.0})) == Approx(7.0));
  CHECK(spectral_norm(SymMatrix(3)) == 0.0);
  DenseMatrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  CHECK(spectral_norm(SymMatrix::from_lower(m)) == Approx(3.0));
}

TEST_CASE("sorted_eigenvalues examples") {
  const auto e = sorted_eigenvalues(SymMatrix::diagonal({1.0, 3.0, 2.0}));
  CHECK(e == std::vector<double>{3.0, 2.0, 1.0});
  CHECK(sorted_eigenvalues(SymMatrix::identity(3)) == std::vector<double>{1.0, 1.0, 1.0});
  DenseMatrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const auto f = sorted_eigenvalues(SymMatrix::from_lower(m));
  CHECK(f[0] == Approx(3.0));
  CHECK(f[1] == Approx(1.0));
}

TEST_CASE("calibrated_error examples") {
  std::mt19937_64 gen(3);
  const PsdMatrix s = test::random_psd(gen, 4, 8);
  CHECK(calibrated_error(s, s, 0.3) == 0.0);
  CHECK(calibrated_error(diag({1.0, 1.0}), 2.0 * SymMatrix::identity(2), 1.0) == Approx(0.5));
  CHECK(calibrated_error(diag({4.0, 1.0}), SymMatrix::diagonal({5.0, 1.0}), 1.0) == Approx(0.2));
}

TEST_CASE("sandwich_check examples") {
  std::mt19937_64 gen(4);
  const PsdMatrix s = test::random_psd(gen, 4, 8);
  CHECK(sandwich_check(s, s, 0.5, 0.0));
  CHECK_FALSE(sandwich_check(diag({1.0, 1.0}), 2.0 * SymMatrix::identity(2), 0.0, 0.5));
  CHECK(sandwich_check(diag({1.0, 1.0}), 2.0 * SymMatrix::identity(2), 0.0, 1.0));
}

TEST_CASE("calibrated_error is equivalent to the sandwich") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t d = 2 + rep % 5;
    const PsdMatrix s = test::random_psd(gen, d, 1 + rep % 7);
    const SymMatrix shat = s.sym() + 0.3 * test::random_sym(gen, d);
    const double lambda = 0.05 + unif(gen);
    const double e = calibrated_error(s, shat, lambda);
    // Away from the boundary both directions must agree.
    CHECK(sandwich_check(s, shat, lambda, e * 1.001 + 1e-9));
    if (e > 1e-6) CHECK_FALSE(sandwich_check(s, shat, lambda, e * 0.999 - 1e-9));
    const double eps = 2.0 * unif(gen);
    if (std::abs(eps - e) > 1e-6 * (1.0 + e)) CHECK(sandwich_check(s, shat, lambda, eps) == (e <= eps));
  }
}

TEST_CASE("degrees_of_freedom examples") {
  CHECK(degrees_of_freedom(PsdMatrix::certify(SymMatrix::identity(6)), 1.0) == Approx(3.0));
  CHECK(degrees_of_freedom(diag({4.0, 1.0}), 1.0) == Approx(1.3));
  CHECK(degrees_of_freedom(diag({4.0, 1.0, 0.0}), 1e-12) == Approx(2.0).epsilon(1e-9));
  CHECK(degrees_of_freedom(diag({4.0, 1.0, 0.0}), 0.0) == 2.0);
}

TEST_CASE("degrees_of_freedom lemma and bounds") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> unif(0.001, 3.0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t d = 1 + rep % 8;
    const PsdMatrix s = test::random_psd(gen, d, 1 + rep % 5);
    const double lambda = unif(gen);
    const double df = degrees_of_freedom(s, lambda);
    CHECK(degrees_of_freedom(s, lambda / 2.0) <= 2.0 * df + 1e-12);
    CHECK(degrees_of_freedom(s, lambda * 1.5) <= df + 1e-12);
    const double rank = static_cast<double>(numerical_rank(s));
    CHECK(df <= std::min(rank, s.sym().trace() / lambda) + 1e-9);
  }
}

TEST_CASE("effective_rank") {
  CHECK(effective_rank(PsdMatrix::certify(SymMatrix::identity(5))) == Approx(5.0));
  CHECK(effective_rank(diag({4.0, 1.0})) == Approx(1.25));
  const Vector x = vec({1.0, 2.0, -1.0});
  CHECK(effective_rank(PsdMatrix::certify(SymMatrix::from_lower(x * x.transpose()))) == Approx(1.0));
  CHECK_THROWS_AS(effective_rank(PsdMatrix::certify(SymMatrix(3))), DegenerateInput);

  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 50; ++rep) {
    const PsdMatrix s = test::random_psd(gen, 6, 1 + rep % 8);
    const double r = effective_rank(s);
    CHECK(r >= 1.0 - 1e-12);
    CHECK(r <= static_cast<double>(numerical_rank(s)) + 1e-9);
  }
}

TEST_CASE("hermitian_dilation") {
  CHECK(hermitian_dilation(Vector::Zero(3)) == SymMatrix(4));
  const SymMatrix h = hermitian_dilation(vec({3.0, 4.0}));
  const auto e = sorted_eigenvalues(h);
  CHECK(e[0] == Approx(5.0));
  CHECK(e[1] == Approx(0.0));
  CHECK(e[2] == Approx(-5.0));
  const SymMatrix u = hermitian_dilation(vec({1.0, 0.0}));
  CHECK(u(0, 2) == 1.0);
  CHECK(u(2, 0) == 1.0);
  CHECK(u.dense().sum() == 2.0);
}

TEST_CASE("spectral_truncate") {
  CHECK(test::max_abs_diff(spectral_truncate(SymMatrix::diagonal({1.0, -1.0}), 2.0),
                           SymMatrix::diagonal({1.0, -1.0})) < 1e-14);
  CHECK(test::max_abs_diff(spectral_truncate(SymMatrix::diagonal({5.0, -5.0}), 2.0),
                           SymMatrix::diagonal({2.0, -2.0})) < 1e-14);
  CHECK(test::max_abs_diff(spectral_truncate(hermitian_dilation(vec({3.0, 4.0})), 2.5),
                           hermitian_dilation(vec({1.5, 2.0}))) < 1e-12);

  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 20; ++rep) {
    const SymMatrix a = test::random_sym(gen, 5);
    CHECK(test::max_abs_diff(spectral_truncate(a, spectral_norm(a) * 1.01), a) < 1e-12);
  }
}

TEST_CASE("two-sided spectrum sandwich at calibrated error 1/2") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 2 + rep % 5;
    const PsdMatrix s = test::random_psd(gen, d, 2 + rep % 6);
    const double lambda = 0.1 + unif(gen);
    const SymMatrix shat = s.sym() + 0.2 * unif(gen) * test::random_sym(gen, d);
    if (calibrated_error(s, shat, lambda) > 0.5) continue;
    ++checked;
    const DenseMatrix sl = s.dense() + lambda * DenseMatrix::Identity(d, d);
    const DenseMatrix hl = shat.dense() + lambda * DenseMatrix::Identity(d, d);
    // S_l^{1/2} Shat_l^{-1} S_l^{1/2} is similar to Shat_l^{-1} S_l.
    const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(sl, hl);
    CHECK(ges.eigenvalues().minCoeff() >= 2.0 / 3.0 - 1e-12);
    CHECK(ges.eigenvalues().maxCoeff() <= 2.0 + 1e-12);
  }
  CHECK(checked > 50);
}
