#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "rcov/applications.hpp"
#include "rcov/error.hpp"
#include "rcov/truncation.hpp"
#include "support.hpp"

using namespace rcov;
using doctest::Approx;

namespace {

PsdMatrix diag(std::initializer_list<double> v) { return PsdMatrix::certify(SymMatrix::diagonal(v)); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("eigenvalue_intervals") {
  const EigenReport zero = eigenvalue_intervals(diag({4.0, 1.0}), 0.0, 2);
  CHECK(zero.intervals[0].first == 4.0);
  CHECK(zero.intervals[0].second == 4.0);
  CHECK(zero.intervals[1].first == 1.0);

  const EigenReport r = eigenvalue_intervals(diag({4.0, 1.0}), 0.1, 2);
  CHECK(r.eigenvalues == std::vector<double>{4.0, 1.0});
  CHECK(r.radius == Approx(0.2));
  CHECK(r.intervals[0].first == Approx(4.0 / 1.2));
  CHECK(r.intervals[0].second == Approx(5.0));

  CHECK_THROWS_AS(eigenvalue_intervals(diag({4.0, 1.0}), 0.5, 2), InvalidEpsilon);
  CHECK_THROWS_AS(eigenvalue_intervals(diag({4.0, 1.0}), -0.1, 2), InvalidEpsilon);
}

TEST_CASE("eigenvalue intervals are nested in epsilon") {
  const PsdMatrix s = diag({5.0, 2.0, 0.5});
  EigenReport prev = eigenvalue_intervals(s, 0.0, 3);
  for (double eps : {0.05, 0.1, 0.2, 0.3, 0.45}) {
    const EigenReport cur = eigenvalue_intervals(s, eps, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(cur.intervals[i].first <= prev.intervals[i].first);
      CHECK(cur.intervals[i].second >= prev.intervals[i].second);
    }
    prev = cur;
  }
}

TEST_CASE("subspace_iteration on diag(4,1)") {
  SubspaceOptions o;
  o.initial = DenseMatrix(vec({1.0, 1.0}) / std::sqrt(2.0));
  const SubspaceResult r = subspace_iteration(diag({4.0, 1.0}), 1, o);
  CHECK(r.converged);
  CHECK(r.residual <= 1e-10);
  CHECK(std::abs(std::abs(r.basis(0, 0)) - 1.0) <= 1e-10);
  CHECK(std::abs(r.basis(1, 0)) <= 1e-10);
}

TEST_CASE("identity is a fixed point") {
  std::mt19937_64 gen(1);
  for (std::size_t k : {1u, 2u, 4u}) {
    SubspaceOptions o;
    o.seed = k;
    const SubspaceResult r = subspace_iteration(PsdMatrix::certify(SymMatrix::identity(4)), k, o);
    CHECK(r.iterations == 0);
    CHECK(r.residual <= 1e-14);
    CHECK(r.converged);
  }
}

TEST_CASE("power iteration rate on a diagonal matrix") {
  const PsdMatrix s = diag({1.0, 0.5, 0.1});
  for (std::size_t t : {1u, 3u, 6u, 10u}) {
    SubspaceOptions o;
    o.tol = 0.0;
    o.max_iters = t;
    o.initial = DenseMatrix(vec({1.0, 1.0, 1.0}) / std::sqrt(3.0));
    const SubspaceResult r = subspace_iteration(s, 1, o);
    CHECK(r.iterations == t);
    CHECK_FALSE(r.converged);
    const Vector u = r.basis.col(0);
    const double tangent = std::hypot(u(1), u(2)) / std::abs(u(0));
    const double expected = std::hypot(std::pow(0.5, t), std::pow(0.1, t));
    CHECK(tangent == Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("subspace iterates stay orthonormal") {
  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 20; ++rep) {
    const PsdMatrix s = test::random_psd(gen, 8, 12);
    for (std::size_t t : {0u, 1u, 5u, 50u}) {
      SubspaceOptions o;
      o.max_iters = t;
      o.seed = static_cast<std::uint64_t>(rep);
      const SubspaceResult r = subspace_iteration(s, 3, o);
      const DenseMatrix g = r.basis.transpose() * r.basis - DenseMatrix::Identity(3, 3);
      CHECK(g.cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  CHECK_THROWS_AS(subspace_iteration(diag({1.0, 2.0}), 3), InvalidRange);
}

TEST_CASE("ridge_theta_bar") {
  CHECK(ridge_theta_bar(100, 1.0, 1.0, 1.0, 1.0, std::exp(-1.0)) == Approx(10.0));
  CHECK(ridge_theta_bar(400, 1.3, 1.1, 2.0, 3.0, 0.1) == Approx(2.0 * ridge_theta_bar(100, 1.3, 1.1, 2.0, 3.0, 0.1)));
  CHECK(ridge_theta_bar(100, 2.6, 1.1, 2.0, 3.0, 0.1) == Approx(2.0 * ridge_theta_bar(100, 1.3, 1.1, 2.0, 3.0, 0.1)));
  CHECK_THROWS_AS(ridge_theta_bar(100, 1.0, 1.0, 1.0, 1.0, 1.0), InvalidConfidence);
}

TEST_CASE("robust_ridge examples") {
  std::mt19937_64 gen(3);
  const SampleMatrix x = test::random_sample(gen, 50, 3);
  std::vector<double> y(50);
  std::normal_distribution<double> normal;
  for (double& v : y) v = normal(gen);
  const PsdMatrix eye = PsdMatrix::certify(SymMatrix::identity(3));

  SUBCASE("no truncation, identity covariance, lambda 0 is the moment estimator") {
    RidgeConfig cfg;
    cfg.lambda = 0.0;
    cfg.theta_bar = kInf;
    const RidgeEstimate r = robust_ridge(x, y, eye, cfg);
    Vector m = Vector::Zero(3);
    for (std::size_t i = 0; i < 50; ++i) m += x.view().row_vector(i) * y[i];
    m /= 50.0;
    CHECK((r.weights - m).norm() <= 1e-14);
  }
  SUBCASE("single pair") {
    const SampleMatrix one(1, 2, {1.0, 0.0});
    const std::vector<double> yy{2.0};
    RidgeConfig cfg;
    cfg.lambda = 0.0;
    cfg.theta_bar = 1.0;
    const RidgeEstimate r = robust_ridge(one, yy, PsdMatrix::certify(SymMatrix::identity(2)), cfg);
    CHECK(r.weights(0) == Approx(1.0));
    CHECK(r.weights(1) == Approx(0.0));
    CHECK(r.truncation_weights[0] == Approx(0.5));
  }
  SUBCASE("noiseless data with the same-block covariance recovers w*") {
    const Vector w_star = vec({1.0, -2.0, 0.5});
    std::vector<double> yy(50);
    for (std::size_t i = 0; i < 50; ++i) yy[i] = x.view().row_vector(i).dot(w_star);
    RidgeConfig cfg;
    cfg.lambda = 0.0;
    cfg.theta_bar = kInf;
    const RidgeEstimate r = robust_ridge(x, yy, sample_covariance(x), cfg);
    CHECK((r.weights - w_star).norm() <= 1e-10);
  }
  SUBCASE("reconstruction and truncation bounds") {
    const PsdMatrix shat = test::random_psd(gen, 3, 10);
    RidgeConfig cfg;
    cfg.lambda = 0.2;
    cfg.theta_bar = 0.8;
    const RidgeEstimate r = robust_ridge(x, y, shat, cfg);
    const Vector back = r.factor.lower().transpose().triangularView<Eigen::Upper>().solve(r.truncated_mean);
    CHECK((back - r.weights).norm() <= 1e-10);
    const auto lower = r.factor.lower().triangularView<Eigen::Lower>();
    for (std::size_t i = 0; i < 50; ++i) {
      const Vector z = lower.solve(x.view().row_vector(i) * y[i]);
      CHECK(r.truncation_weights[i] * z.norm() <= std::min(z.norm(), 0.8) + 1e-12);
    }
  }
  SUBCASE("length mismatch") {
    RidgeConfig cfg;
    cfg.lambda = 0.1;
    cfg.theta_bar = 1.0;
    CHECK_THROWS_AS(robust_ridge(x, std::vector<double>(49, 1.0), eye, cfg), DataError);
  }
}

TEST_CASE("dilation_mean") {
  const std::vector<Vector> small{vec({0.1, 0.2}), vec({-0.3, 0.1})};
  const Vector m = dilation_mean(small, 10.0);
  CHECK((m - (small[0] + small[1]) / 2.0).norm() <= 1e-14);

  const std::vector<Vector> one{vec({3.0, 4.0})};
  const Vector t = dilation_mean(one, 2.5);
  CHECK(t(0) == Approx(1.5));
  CHECK(t(1) == Approx(2.0));

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Vector> z;
    for (int i = 0; i < 20; ++i) z.push_back(test::gaussian_matrix(gen, 4, 1).col(0) * unif(gen));
    const double theta = unif(gen);
    CHECK((dilation_mean(z, theta) - truncated_mean(z, theta)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("excess_risk") {
  const Vector w = vec({1.0, 2.0});
  CHECK(excess_risk(w, w, diag({4.0, 1.0})) == 0.0);
  CHECK(excess_risk(vec({1.0, 3.0}), vec({0.0, 1.0}), PsdMatrix::certify(SymMatrix::identity(2))) == Approx(5.0));
  CHECK(excess_risk(vec({2.0, 3.0}), vec({1.0, 2.0}), diag({4.0, 1.0})) == Approx(5.0));
}
