// Compiled with -mavx2 (no -mfma) so the vector loops round exactly like the
// scalar reference.
#include <immintrin.h>

#include "rcov/kernels.hpp"

namespace rcov::kernels::avx2 {

void syr_lower(double* acc, std::size_t d, const double* x, double w) {
  for (std::size_t i = 0; i < d; ++i) {
    const double wi = w * x[i];
    const __m256d vwi = _mm256_set1_pd(wi);
    double* row = acc + i * d;
    const std::size_t len = i + 1;
    std::size_t j = 0;
    for (; j + 4 <= len; j += 4) {
      const __m256d prod = _mm256_mul_pd(vwi, _mm256_loadu_pd(x + j));
      _mm256_storeu_pd(row + j, _mm256_add_pd(_mm256_loadu_pd(row + j), prod));
    }
    for (; j < len; ++j) row[j] += wi * x[j];
  }
}

double whitened_norm2(const double* r, std::size_t d, const double* x, double* work) {
  for (std::size_t i = 0; i < d; ++i) work[i] = x[i];
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = r + k * d;
    const double yk = work[k] / col[k];
    sum += yk * yk;
    const __m256d vyk = _mm256_set1_pd(yk);
    std::size_t i = k + 1;
    for (; i + 4 <= d; i += 4) {
      const __m256d prod = _mm256_mul_pd(vyk, _mm256_loadu_pd(col + i));
      _mm256_storeu_pd(work + i, _mm256_sub_pd(_mm256_loadu_pd(work + i), prod));
    }
    for (; i < d; ++i) work[i] -= yk * col[i];
  }
  return sum;
}

// Four rows at once, one per lane. work[i * 4 + lane] holds row `lane`'s
// partially reduced entry i, so every lane repeats the scalar sequence.
void whitened_norm2_rows(const double* r, std::size_t d, const double* x, std::size_t rows,
                         double* out, double* work) {
  std::size_t row = 0;
  for (; row + 4 <= rows; row += 4) {
    const double* x0 = x + row * d;
    for (std::size_t i = 0; i < d; ++i) {
      _mm256_storeu_pd(work + i * 4, _mm256_set_pd(x0[3 * d + i], x0[2 * d + i], x0[d + i], x0[i]));
    }
    __m256d sum = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      const double* col = r + k * d;
      const __m256d yk = _mm256_div_pd(_mm256_loadu_pd(work + k * 4), _mm256_set1_pd(col[k]));
      sum = _mm256_add_pd(sum, _mm256_mul_pd(yk, yk));
      for (std::size_t i = k + 1; i < d; ++i) {
        const __m256d prod = _mm256_mul_pd(yk, _mm256_set1_pd(col[i]));
        _mm256_storeu_pd(work + i * 4, _mm256_sub_pd(_mm256_loadu_pd(work + i * 4), prod));
      }
    }
    _mm256_storeu_pd(out + row, sum);
  }
  for (; row < rows; ++row) out[row] = whitened_norm2(r, d, x + row * d, work);
}

}  // namespace rcov::kernels::avx2
