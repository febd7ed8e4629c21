#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rcov/symmat.hpp"

namespace rcov {

/// Non-owning view of n observations of dimension d, one per row, row-major.
class SampleView {
 public:
  SampleView() = default;
  SampleView(const double* data, std::size_t n, std::size_t d) : data_(data), n_(n), d_(d) {}

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return d_; }
  const double* row(std::size_t i) const { return data_ + i * d_; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), d_}; }
  Vector row_vector(std::size_t i) const;

  /// Rows [begin, begin + count). Throws DataError when out of range.
  SampleView slice(std::size_t begin, std::size_t count) const;

 private:
  const double* data_ = nullptr;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
};

/// Owning n x d observation matrix; n >= 1, d >= 1, all entries finite.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t n, std::size_t d);
  SampleMatrix(std::size_t n, std::size_t d, std::vector<double> row_major);
  static SampleMatrix from_dense(const DenseMatrix& m);

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return d_; }
  const double* row(std::size_t i) const { return data_.data() + i * d_; }
  double* mutable_row(std::size_t i) { return data_.data() + i * d_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * d_ + j]; }
  const std::vector<double>& data() const { return data_; }

  SampleView view() const { return {data_.data(), n_, d_}; }
  operator SampleView() const { return view(); }  // NOLINT(google-explicit-constructor)

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> data_;
};

}  // namespace rcov
