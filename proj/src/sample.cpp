#include "rcov/sample.hpp"

#include <cmath>
#include <string>

#include "rcov/error.hpp"

namespace rcov {

Vector SampleView::row_vector(std::size_t i) const {
  return Eigen::Map<const Vector>(row(i), static_cast<Eigen::Index>(d_));
}

SampleView SampleView::slice(std::size_t begin, std::size_t count) const {
  if (begin > n_ || count > n_ - begin) {
    throw DataError("row slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                    ") out of range for " + std::to_string(n_) + " rows");
  }
  return {data_ + begin * d_, count, d_};
}

SampleMatrix::SampleMatrix(std::size_t n, std::size_t d) : n_(n), d_(d), data_(n * d, 0.0) {
  if (n == 0 || d == 0) throw DataError("sample must have at least one row and one column");
}

SampleMatrix::SampleMatrix(std::size_t n, std::size_t d, std::vector<double> row_major)
    : n_(n), d_(d), data_(std::move(row_major)) {
  if (n == 0 || d == 0) throw DataError("sample must have at least one row and one column");
  if (data_.size() != n * d) throw DataError("sample buffer size does not match n * d");
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw DataError("non-finite value at row " + std::to_string(k / d + 1) + ", column " +
                      std::to_string(k % d + 1));
    }
  }
}

SampleMatrix SampleMatrix::from_dense(const DenseMatrix& m) {
  const auto n = static_cast<std::size_t>(m.rows());
  const auto d = static_cast<std::size_t>(m.cols());
  std::vector<double> buf(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      buf[i * d + j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return SampleMatrix(n, d, std::move(buf));
}

}  // namespace rcov
