#include "sgdsa/kernels.hpp"

namespace sgdsa::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sub_scaled_scalar(const double* w, const double* g, double eta, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] - eta * g[i];
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar, sub_scaled_scalar};
  return table;
}

}  // namespace sgdsa::kernels
