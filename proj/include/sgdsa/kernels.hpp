#pragma once

// Dense double-precision inner loops used by the network and the optimizers.
//
// Every kernel exists as a portable scalar reference plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64). The variant is picked once at runtime
// from CPU capabilities, or forced through SGDSA_SIMD=scalar|avx2|neon|auto.
//
// Elementwise kernels (axpy, sub_scaled) round exactly like the scalar
// reference. Reductions (dot) use a different summation order and agree with
// the scalar reference only up to rounding.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace sgdsa::kernels {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  const char* name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] = w[i] - eta * g[i]
  void (*sub_scaled)(const double* w, const double* g, double eta, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
#if defined(SGDSA_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(SGDSA_HAVE_NEON)
const KernelTable& neon_table() noexcept;
#endif

/// True when the variant was compiled in and the running CPU supports it.
bool available(Backend backend) noexcept;

/// Table for a specific variant; throws std::invalid_argument if unavailable.
const KernelTable& table(Backend backend);

/// The process-wide active table.
const KernelTable& active() noexcept;
Backend active_backend() noexcept;

/// Forces the process-wide variant. Not meant to be called while training runs.
void select(Backend backend);

/// Best variant the CPU supports.
Backend best_available() noexcept;

std::optional<Backend> parse_backend(std::string_view name) noexcept;
std::string_view backend_name(Backend backend) noexcept;

double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void sub_scaled(std::span<const double> w, std::span<const double> g, double eta, std::span<double> out);

}  // namespace sgdsa::kernels
