#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sgdsa {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) throw std::invalid_argument("matrix data size does not match shape");
  }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// One minibatch (x, y). `sample_indices` are row numbers in the dataset the
/// batch was cut from.
struct Minibatch {
  Matrix inputs;
  std::vector<std::size_t> targets;
  std::size_t epoch_index = 0;
  std::size_t batch_index = 0;
  std::vector<std::size_t> sample_indices;

  std::size_t size() const noexcept { return targets.size(); }
};

}  // namespace sgdsa
