#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tcq {

// Dense row-major matrix of doubles. Rows are the unit of work for batched
// quantization (one sequence per row).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    if (r >= rows) throw std::out_of_range("Matrix::row: index out of range");
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    if (r >= rows) throw std::out_of_range("Matrix::row: index out of range");
    return {data.data() + r * cols, cols};
  }

  std::size_t size() const { return rows * cols; }
  bool empty() const { return rows == 0 || cols == 0; }
};

}  // namespace tcq
