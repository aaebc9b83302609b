#include "sgdsa/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sgdsa/kernels.hpp"

namespace sgdsa {
namespace {

void check_labels(const Matrix& logits, std::span<const std::size_t> labels) {
  if (labels.size() != logits.rows) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) + " does not match batch size " +
                                std::to_string(logits.rows));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= logits.cols) {
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                  " out of range for " + std::to_string(logits.cols) + " classes");
    }
  }
}

void check_shapes(const NetworkSpec& spec, const ParameterVector& w, const Matrix& inputs) {
  spec.validate();
  if (w.size() != spec.parameter_count()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(w.size()) + " entries, network needs " +
                                std::to_string(spec.parameter_count()));
  }
  if (inputs.cols != spec.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(inputs.cols) + " features, network expects " +
                                std::to_string(spec.input_dim()));
  }
}

double activate(Activation a, double z) { return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// Derivative expressed through the activation output.
double activation_slope(Activation a, double out) { return a == Activation::relu ? (out > 0.0 ? 1.0 : 0.0) : 1.0 - out * out; }

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

double log_sum_exp(std::span<const double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double z : row) sum += std::exp(z - peak);
  return peak + std::log(sum);
}

// Activations of every layer; acts[0] is the input, acts.back() the logits.
std::vector<Matrix> forward_all(const NetworkSpec& spec, const ParameterVector& w, const Matrix& inputs) {
  const auto& kt = kernels::active();
  std::vector<Matrix> acts;
  acts.reserve(spec.layer_sizes.size());
  acts.push_back(inputs);
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::size_t fan_in = spec.layer_sizes[l];
    const std::size_t fan_out = spec.layer_sizes[l + 1];
    const double* weights = w.values.data() + spec.weight_offset(l);
    const double* biases = w.values.data() + spec.bias_offset(l);
    const bool hidden = l + 1 < spec.layer_count();
    const Matrix& in = acts.back();
    Matrix out(in.rows, fan_out);
    for (std::size_t b = 0; b < in.rows; ++b) {
      const double* x = in.data.data() + b * fan_in;
      for (std::size_t j = 0; j < fan_out; ++j) {
        const double z = kt.dot(weights + j * fan_in, x, fan_in) + biases[j];
        out(b, j) = hidden ? activate(spec.activation, z) : z;
      }
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

}  // namespace

std::string_view activation_name(Activation a) noexcept { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected relu or tanh)");
}

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
  for (std::size_t n : layer_sizes) {
    if (n == 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

std::size_t NetworkSpec::parameter_count() const {
  std::size_t m = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) m += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return m;
}

std::size_t NetworkSpec::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return off;
}

std::size_t NetworkSpec::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + layer_sizes[layer] * layer_sizes[layer + 1];
}

ParameterVector init_weights(const NetworkSpec& spec, RngState& rng) {
  spec.validate();
  ParameterVector w{std::vector<double>(spec.parameter_count(), 0.0)};
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const auto fan_in = static_cast<double>(spec.layer_sizes[l]);
    const double scale = std::sqrt((spec.activation == Activation::relu ? 2.0 : 1.0) / fan_in);
    const std::size_t begin = spec.weight_offset(l);
    const std::size_t end = spec.bias_offset(l);
    for (std::size_t k = begin; k < end; ++k) w.values[k] = scale * rng.normal();
  }
  return w;
}

Matrix forward(const NetworkSpec& spec, const ParameterVector& w, const Matrix& inputs) {
  check_shapes(spec, w, inputs);
  return std::move(forward_all(spec, w, inputs).back());
}

double loss(const Matrix& logits, std::span<const std::size_t> labels) {
  check_labels(logits, labels);
  if (logits.rows == 0) throw std::invalid_argument("loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const auto row = logits.row(i);
    total += log_sum_exp(row) - row[labels[i]];
  }
  return total / static_cast<double>(logits.rows);
}

std::size_t correct_count(const Matrix& logits, std::span<const std::size_t> labels) {
  check_labels(logits, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows; ++i) hits += argmax(logits.row(i)) == labels[i] ? 1 : 0;
  return hits;
}

double accuracy(const Matrix& logits, std::span<const std::size_t> labels) {
  const std::size_t hits = correct_count(logits, labels);
  return logits.rows == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(logits.rows);
}

LossGradient loss_and_gradient(const NetworkSpec& spec, const ParameterVector& w, const Minibatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("empty minibatch");
  if (batch.inputs.rows != batch.size()) throw std::invalid_argument("minibatch inputs and targets disagree in length");
  check_shapes(spec, w, batch.inputs);
  const auto& kt = kernels::active();

  std::vector<Matrix> acts = forward_all(spec, w, batch.inputs);
  const Matrix& logits = acts.back();
  check_labels(logits, batch.targets);

  LossGradient out;
  out.gradient.values.assign(w.size(), 0.0);
  out.correct = correct_count(logits, batch.targets);

  // dL/dz at the output: (softmax - onehot) / B
  const std::size_t rows = batch.size();
  const double inv_rows = 1.0 / static_cast<double>(rows);
  Matrix delta(rows, spec.class_count());
  double total = 0.0;
  for (std::size_t b = 0; b < rows; ++b) {
    const auto z = logits.row(b);
    const double lse = log_sum_exp(z);
    total += lse - z[batch.targets[b]];
    for (std::size_t j = 0; j < z.size(); ++j) delta(b, j) = std::exp(z[j] - lse) * inv_rows;
    delta(b, batch.targets[b]) -= inv_rows;
  }
  out.loss = total / static_cast<double>(rows);

  for (std::size_t l = spec.layer_count(); l-- > 0;) {
    const std::size_t fan_in = spec.layer_sizes[l];
    const std::size_t fan_out = spec.layer_sizes[l + 1];
    const double* weights = w.values.data() + spec.weight_offset(l);
    double* grad_w = out.gradient.values.data() + spec.weight_offset(l);
    double* grad_b = out.gradient.values.data() + spec.bias_offset(l);
    const Matrix& in = acts[l];
    Matrix delta_in(rows, fan_in);
    for (std::size_t b = 0; b < rows; ++b) {
      const double* x = in.data.data() + b * fan_in;
      double* dx = delta_in.data.data() + b * fan_in;
      for (std::size_t j = 0; j < fan_out; ++j) {
        const double d = delta(b, j);
        if (d == 0.0) continue;
        kt.axpy(d, x, grad_w + j * fan_in, fan_in);
        grad_b[j] += d;
        if (l > 0) kt.axpy(d, weights + j * fan_in, dx, fan_in);
      }
    }
    if (l > 0) {
      for (std::size_t k = 0; k < delta_in.data.size(); ++k) {
        delta_in.data[k] *= activation_slope(spec.activation, in.data[k]);
      }
      delta = std::move(delta_in);
    }
  }
  return out;
}

}  // namespace sgdsa
