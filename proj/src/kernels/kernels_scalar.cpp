#include "rcov/kernels.hpp"

namespace rcov::kernels::scalar {

void syr_lower(double* acc, std::size_t d, const double* x, double w) {
  for (std::size_t i = 0; i < d; ++i) {
    const double wi = w * x[i];
    double* row = acc + i * d;
    for (std::size_t j = 0; j <= i; ++j) {
      row[j] += wi * x[j];
    }
  }
}

double whitened_norm2(const double* r, std::size_t d, const double* x, double* work) {
  for (std::size_t i = 0; i < d; ++i) work[i] = x[i];
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = r + k * d;
    const double yk = work[k] / col[k];
    sum += yk * yk;
    for (std::size_t i = k + 1; i < d; ++i) {
      work[i] -= yk * col[i];
    }
  }
  return sum;
}

void whitened_norm2_rows(const double* r, std::size_t d, const double* x, std::size_t rows,
                         double* out, double* work) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = whitened_norm2(r, d, x + i * d, work);
}

}  // namespace rcov::kernels::scalar
