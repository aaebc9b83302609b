#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "sgdsa/kernels.hpp"

namespace sgdsa::kernels {
namespace {

Backend initial_backend() noexcept {
  if (const char* env = std::getenv("SGDSA_SIMD")) {
    if (auto requested = parse_backend(env); requested && available(*requested)) return *requested;
  }
  return best_available();
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
}

}  // namespace

bool available(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(SGDSA_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(SGDSA_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!available(backend)) {
    throw std::invalid_argument("SIMD backend '" + std::string(backend_name(backend)) + "' is not available");
  }
  switch (backend) {
#if defined(SGDSA_HAVE_AVX2)
    case Backend::avx2:
      return avx2_table();
#endif
#if defined(SGDSA_HAVE_NEON)
    case Backend::neon:
      return neon_table();
#endif
    default:
      return scalar_table();
  }
}

Backend best_available() noexcept {
  if (available(Backend::avx2)) return Backend::avx2;
  if (available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

const KernelTable& active() noexcept { return table(current().load(std::memory_order_relaxed)); }

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void select(Backend backend) {
  table(backend);
  current().store(backend, std::memory_order_relaxed);
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "neon") return Backend::neon;
  if (name == "auto") return best_available();
  return std::nullopt;
}

std::string_view backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), "dot");
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_lengths(x.size(), y.size(), "axpy");
  active().axpy(a, x.data(), y.data(), x.size());
}

void sub_scaled(std::span<const double> w, std::span<const double> g, double eta, std::span<double> out) {
  check_lengths(w.size(), g.size(), "sub_scaled");
  check_lengths(w.size(), out.size(), "sub_scaled");
  active().sub_scaled(w.data(), g.data(), eta, out.data(), w.size());
}

}  // namespace sgdsa::kernels
