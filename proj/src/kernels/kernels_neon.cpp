#include <arm_neon.h>

#include "rcov/kernels.hpp"

namespace rcov::kernels::neon {

void syr_lower(double* acc, std::size_t d, const double* x, double w) {
  for (std::size_t i = 0; i < d; ++i) {
    const double wi = w * x[i];
    const float64x2_t vwi = vdupq_n_f64(wi);
    double* row = acc + i * d;
    const std::size_t len = i + 1;
    std::size_t j = 0;
    for (; j + 2 <= len; j += 2) {
      const float64x2_t prod = vmulq_f64(vwi, vld1q_f64(x + j));
      vst1q_f64(row + j, vaddq_f64(vld1q_f64(row + j), prod));
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
    const float64x2_t vyk = vdupq_n_f64(yk);
    std::size_t i = k + 1;
    for (; i + 2 <= d; i += 2) {
      const float64x2_t prod = vmulq_f64(vyk, vld1q_f64(col + i));
      vst1q_f64(work + i, vsubq_f64(vld1q_f64(work + i), prod));
    }
    for (; i < d; ++i) work[i] -= yk * col[i];
  }
  return sum;
}

void whitened_norm2_rows(const double* r, std::size_t d, const double* x, std::size_t rows,
                         double* out, double* work) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = whitened_norm2(r, d, x + i * d, work);
}

}  // namespace rcov::kernels::neon
