#include <arm_neon.h>

#include "sgdsa/kernels.hpp"

namespace sgdsa::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void sub_scaled_neon(const double* w, const double* g, double eta, double* out, std::size_t n) {
  const float64x2_t veta = vdupq_n_f64(eta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(w + i), vmulq_f64(veta, vld1q_f64(g + i))));
  }
  for (; i < n; ++i) out[i] = w[i] - eta * g[i];
}

}  // namespace

const KernelTable& neon_table() noexcept {
  static const KernelTable table{"neon", dot_neon, axpy_neon, sub_scaled_neon};
  return table;
}

}  // namespace sgdsa::kernels
