#include "pacc/array.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace pacc {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

NumArray::NumArray(std::vector<std::size_t> shape, std::vector<double> data) {
  if (shape_size(shape) != data.size()) {
    throw ShapeError("NumArray: shape implies " +
                     std::to_string(shape_size(shape)) + " entries, got " +
                     std::to_string(data.size()));
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw NumericError("NumArray: non-finite entry rejected at construction");
    }
  }
  shape_ = std::move(shape);
  data_ = std::move(data);
}

NumArray NumArray::unchecked(std::vector<std::size_t> shape,
                             std::vector<double> data) {
  NumArray a;
  a.shape_ = std::move(shape);
  a.data_ = std::move(data);
  return a;
}

NumArray NumArray::scalar(double v) { return NumArray({}, {v}); }

NumArray NumArray::zeros(std::vector<std::size_t> shape) {
  std::vector<double> data(shape_size(shape), 0.0);
  return NumArray(std::move(shape), std::move(data));
}

NumArray NumArray::full(std::vector<std::size_t> shape, double v) {
  std::vector<double> data(shape_size(shape), v);
  return NumArray(std::move(shape), std::move(data));
}

NumArray NumArray::from_vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return NumArray({n}, std::move(v));
}

NumArray NumArray::from_matrix(std::size_t rows, std::size_t cols,
                               std::vector<double> data) {
  return NumArray({rows, cols}, std::move(data));
}

std::size_t NumArray::rows() const {
  if (rank() != 2) throw ShapeError("rows(): array is not rank-2");
  return shape_[0];
}

std::size_t NumArray::cols() const {
  if (rank() != 2) throw ShapeError("cols(): array is not rank-2");
  return shape_[1];
}

double NumArray::at(std::size_t r, std::size_t c) const {
  return data_[r * cols() + c];
}

double& NumArray::at(std::size_t r, std::size_t c) {
  return data_[r * cols() + c];
}

double NumArray::scalar_value() const {
  if (size() != 1) throw ShapeError("scalar_value(): array has size != 1");
  return data_[0];
}

bool NumArray::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace pacc
