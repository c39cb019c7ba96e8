#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pacc/errors.hpp"

namespace pacc {

// Dense row-major array of 64-bit floats. Rank 0 (scalar), 1, or 2. Every
// public constructor rejects NaN/Inf entries so downstream code can assume
// finiteness.
class NumArray {
 public:
  NumArray() = default;  // rank-1, size 0

  NumArray(std::vector<std::size_t> shape, std::vector<double> data);

  static NumArray scalar(double v);
  static NumArray zeros(std::vector<std::size_t> shape);
  static NumArray full(std::vector<std::size_t> shape, double v);
  static NumArray from_vector(std::vector<double> v);
  static NumArray from_matrix(std::size_t rows, std::size_t cols,
                              std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  bool same_shape(const NumArray& o) const { return shape_ == o.shape_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  std::span<const double> data() const { return {data_.data(), data_.size()}; }
  std::span<double> data() { return {data_.data(), data_.size()}; }
  const std::vector<double>& values() const { return data_; }

  bool is_scalar() const { return shape_.empty(); }
  double scalar_value() const;

  bool all_finite() const;

  bool operator==(const NumArray& o) const {
    return shape_ == o.shape_ && data_ == o.data_;
  }

  // Skips the finiteness check; for internal use where the producer checks
  // with better error context (the tape names the offending op).
  static NumArray unchecked(std::vector<std::size_t> shape,
                            std::vector<double> data);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);

}  // namespace pacc
