#pragma once

#include <random>

#include "rcov/sample.hpp"
#include "rcov/symmat.hpp"

namespace rcov::test {

inline DenseMatrix gaussian_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal;
  DenseMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(gen);
  }
  return g;
}

// Wishart-like PSD matrix; rank <= min(d, k).
inline PsdMatrix random_psd(std::mt19937_64& gen, std::size_t d, std::size_t k) {
  const DenseMatrix g = gaussian_matrix(gen, k, d);
  return PsdMatrix::by_construction(SymMatrix::symmetric_part(g.transpose() * g / static_cast<double>(k)));
}

inline SymMatrix random_sym(std::mt19937_64& gen, std::size_t d) {
  const DenseMatrix g = gaussian_matrix(gen, d, d);
  return SymMatrix::symmetric_part(g);
}

inline SampleMatrix random_sample(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  return SampleMatrix::from_dense(gaussian_matrix(gen, n, d));
}

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  return (a.dense() - b.dense()).cwiseAbs().maxCoeff();
}

}  // namespace rcov::test
