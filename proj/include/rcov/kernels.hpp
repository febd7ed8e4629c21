#pragma once

// Inner loops of the estimators: the weighted rank-one update that builds
// every covariance estimate, and the forward substitution that measures
// whitened norms. Each has a scalar reference and SIMD variants selected at
// runtime. All variants perform the same elementwise multiply and subtract
// (or add) in the same order without fused multiply-add, so their results
// are bit-identical to the scalar reference.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace rcov::kernels {

enum class Isa { scalar, avx2, neon };

/// acc[i*d + j] += (w * x[i]) * x[j] for 0 <= j <= i < d.
/// acc is a row-major d x d buffer; only the lower triangle is touched.
using SyrLowerFn = void (*)(double* acc, std::size_t d, const double* x, double w);

/// Returns ||R^{-1} x||^2 where R is lower triangular, stored column-major
/// (column k contiguous), with a strictly positive diagonal. `work` must hold
/// d doubles; it is overwritten with R^{-1} x partially reduced.
using WhitenedNorm2Fn = double (*)(const double* r_colmajor, std::size_t d, const double* x,
                                   double* work);

/// Rows kept in flight by WhitenedNorm2RowsFn; `work` must hold kRowBlock * d doubles.
inline constexpr std::size_t kRowBlock = 4;

/// out[i] = ||R^{-1} x_i||^2 for `rows` contiguous rows of x (row-major, stride d).
/// Each row is reduced in the same order as WhitenedNorm2Fn.
using WhitenedNorm2RowsFn = void (*)(const double* r_colmajor, std::size_t d, const double* x,
                                     std::size_t rows, double* out, double* work);

struct Table {
  Isa isa;
  SyrLowerFn syr_lower;
  WhitenedNorm2Fn whitened_norm2;
  WhitenedNorm2RowsFn whitened_norm2_rows;
};

namespace scalar {
void syr_lower(double* acc, std::size_t d, const double* x, double w);
double whitened_norm2(const double* r_colmajor, std::size_t d, const double* x, double* work);
void whitened_norm2_rows(const double* r_colmajor, std::size_t d, const double* x, std::size_t rows,
                         double* out, double* work);
}  // namespace scalar

/// ISAs compiled into this build and supported by the running CPU.
std::vector<Isa> available();

/// Table for a specific ISA. Throws rcov::InvalidConfig if it is not available.
const Table& table_for(Isa isa);

/// Table used by the estimators. Defaults to the widest available ISA; the
/// RCOV_KERNEL environment variable ("scalar", "avx2", "neon") overrides it.
const Table& current();

/// Force the ISA used by current(). Throws if unavailable.
void set_active(Isa isa);
Isa active();

std::string_view name(Isa isa);
std::optional<Isa> parse_isa(std::string_view s);

}  // namespace rcov::kernels
