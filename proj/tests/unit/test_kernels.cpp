#include <algorithm>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "rcov/calibrated.hpp"
#include "rcov/error.hpp"
#include "rcov/kernels.hpp"
#include "rcov/symmat.hpp"
#include "support.hpp"

using namespace rcov;

namespace {

std::vector<double> random_vec(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(gen);
  return v;
}

// Lower factor in column-major layout with a well-conditioned positive diagonal.
std::vector<double> random_factor(std::mt19937_64& gen, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<double> r(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    r[k * d + k] = 1.0 + std::abs(normal(gen));
    for (std::size_t i = k + 1; i < d; ++i) r[k * d + i] = 0.3 * normal(gen);
  }
  return r;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar is always available") {
  const auto isas = kernels::available();
  REQUIRE_FALSE(isas.empty());
  CHECK(isas.front() == kernels::Isa::scalar);
  CHECK(kernels::table_for(kernels::Isa::scalar).isa == kernels::Isa::scalar);
}

TEST_CASE("parse_isa and name round trip") {
  for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2, kernels::Isa::neon}) {
    CHECK(kernels::parse_isa(kernels::name(isa)) == isa);
  }
  CHECK_FALSE(kernels::parse_isa("sse9").has_value());
}

TEST_CASE("syr_lower matches a hand rank-one update") {
  const double x[3] = {1.0, 2.0, 3.0};
  std::vector<double> acc(9, 0.0);
  kernels::scalar::syr_lower(acc.data(), 3, x, 2.0);
  CHECK(acc[0] == 2.0);
  CHECK(acc[3] == 4.0);
  CHECK(acc[4] == 8.0);
  CHECK(acc[6] == 6.0);
  CHECK(acc[7] == 12.0);
  CHECK(acc[8] == 18.0);
  CHECK(acc[1] == 0.0);  // upper triangle untouched
}

TEST_CASE("whitened_norm2 solves the triangular system") {
  // R = [[2,0],[1,1]] column-major; R^{-1}(2,1) = (1,0).
  const double r[4] = {2.0, 1.0, 0.0, 1.0};
  const double x[2] = {2.0, 1.0};
  double work[2];
  CHECK(kernels::scalar::whitened_norm2(r, 2, x, work) == doctest::Approx(1.0));
}

TEST_CASE("SIMD variants are bit-identical to scalar") {
  std::mt19937_64 gen(11);
  const kernels::Table& ref = kernels::table_for(kernels::Isa::scalar);
  for (kernels::Isa isa : kernels::available()) {
    const kernels::Table& t = kernels::table_for(isa);
    CAPTURE(kernels::name(isa));
    for (std::size_t d : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 17u, 33u, 50u}) {
      CAPTURE(d);
      std::vector<double> a = random_vec(gen, d * d);
      std::vector<double> b = a;
      for (int rep = 0; rep < 5; ++rep) {
        const std::vector<double> x = random_vec(gen, d);
        const double w = std::abs(random_vec(gen, 1)[0]);
        ref.syr_lower(a.data(), d, x.data(), w);
        t.syr_lower(b.data(), d, x.data(), w);
      }
      CHECK(same_bits(a, b));

      const std::vector<double> r = random_factor(gen, d);
      const std::vector<double> x = random_vec(gen, d);
      std::vector<double> w1(d), w2(d);
      const double n1 = ref.whitened_norm2(r.data(), d, x.data(), w1.data());
      const double n2 = t.whitened_norm2(r.data(), d, x.data(), w2.data());
      CHECK(std::memcmp(&n1, &n2, sizeof n1) == 0);
    }
  }
}

TEST_CASE("row-block whitening matches the single-row scalar kernel bit for bit") {
  std::mt19937_64 gen(12);
  for (std::size_t d : {1, 2, 3, 5, 8, 13, 50}) {
    const std::vector<double> r = random_factor(gen, d);
    for (std::size_t rows : {0, 1, 3, 4, 5, 9, 16}) {
      const std::vector<double> x = random_vec(gen, rows * d);
      std::vector<double> work(d);
      std::vector<double> want(rows);
      for (std::size_t i = 0; i < rows; ++i) want[i] = kernels::scalar::whitened_norm2(r.data(), d, x.data() + i * d, work.data());
      for (kernels::Isa isa : kernels::available()) {
        std::vector<double> got(rows);
        std::vector<double> block(kernels::kRowBlock * d);
        kernels::table_for(isa).whitened_norm2_rows(r.data(), d, x.data(), rows, got.data(), block.data());
        CHECK(same_bits(got, want));
      }
    }
  }
}

TEST_CASE("refine_step is identical under every kernel") {
  std::mt19937_64 gen(5);
  const SampleMatrix x = test::random_sample(gen, 300, 9);
  const PsdMatrix current = test::random_psd(gen, 9, 20);
  const kernels::Isa before = kernels::active();
  std::vector<SymMatrix> results;
  for (kernels::Isa isa : kernels::available()) {
    kernels::set_active(isa);
    results.push_back(refine_step(current, 0.5, x, 4.0).estimate.sym());
  }
  kernels::set_active(before);
  for (const SymMatrix& m : results) CHECK(m == results.front());
}

TEST_CASE("unavailable ISA is rejected") {
  const auto isas = kernels::available();
  for (auto isa : {kernels::Isa::avx2, kernels::Isa::neon}) {
    if (std::find(isas.begin(), isas.end(), isa) == isas.end()) {
      CHECK_THROWS_AS(kernels::table_for(isa), InvalidConfig);
    }
  }
}
