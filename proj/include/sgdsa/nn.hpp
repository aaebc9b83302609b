#pragma once

// Multilayer perceptron with a softmax cross-entropy head.
//
// Parameter packing (frozen, format version 1): for each affine layer
// l = 0 .. L-2 in order, the weight matrix of shape
// layer_sizes[l+1] x layer_sizes[l] in row-major order (row = output unit),
// followed by the layer_sizes[l+1] biases.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sgdsa/matrix.hpp"
#include "sgdsa/rng.hpp"

namespace sgdsa {

enum class Activation { relu, tanh };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::relu;

  /// Throws std::invalid_argument unless there are >= 2 positive sizes.
  void validate() const;
  std::size_t parameter_count() const;
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t class_count() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  /// Offset of layer l's weight block inside the packed vector.
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct ParameterVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }
  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

struct GradientVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }
};

ParameterVector init_weights(const NetworkSpec& spec, RngState& rng);

Matrix forward(const NetworkSpec& spec, const ParameterVector& w, const Matrix& inputs);

/// Mean softmax cross-entropy over the rows.
double loss(const Matrix& logits, std::span<const std::size_t> labels);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const Matrix& logits, std::span<const std::size_t> labels);
std::size_t correct_count(const Matrix& logits, std::span<const std::size_t> labels);

struct LossGradient {
  double loss = 0.0;
  GradientVector gradient;
  /// Correct predictions of the pre-step forward pass.
  std::size_t correct = 0;
};

/// Mean batch loss and its exact gradient by reverse-mode differentiation.
LossGradient loss_and_gradient(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch);

}  // namespace sgdsa
