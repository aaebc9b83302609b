#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdsa/kernels.hpp"
#include "sgdsa/rng.hpp"

using namespace sgdsa;

namespace {

std::vector<double> random_vector(RngState& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * 3.0;
  return v;
}

std::vector<kernels::Backend> simd_backends() {
  std::vector<kernels::Backend> out;
  for (auto b : {kernels::Backend::avx2, kernels::Backend::neon}) {
    if (kernels::available(b)) out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar backend is always available and parseable") {
  CHECK(kernels::available(kernels::Backend::scalar));
  CHECK(kernels::parse_backend("scalar") == kernels::Backend::scalar);
  CHECK(kernels::parse_backend("auto") == kernels::best_available());
  CHECK_FALSE(kernels::parse_backend("sse9").has_value());
  CHECK(kernels::backend_name(kernels::Backend::avx2) == "avx2");
}

TEST_CASE("selecting an unavailable backend throws and keeps the current one") {
  const auto before = kernels::active_backend();
#if defined(__x86_64__)
  CHECK_THROWS_AS(kernels::select(kernels::Backend::neon), std::invalid_argument);
#endif
  CHECK(kernels::active_backend() == before);
}

TEST_CASE("elementwise SIMD kernels are bit-identical to the scalar reference") {
  const auto& ref = kernels::scalar_table();
  RngState rng = RngState::new_master(11);
  for (auto backend : simd_backends()) {
    const auto& simd = kernels::table(backend);
    CAPTURE(simd.name);
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto x = random_vector(rng, n);
      const auto y0 = random_vector(rng, n);
      const double a = rng.normal();

      auto y_ref = y0;
      auto y_simd = y0;
      ref.axpy(a, x.data(), y_ref.data(), n);
      simd.axpy(a, x.data(), y_simd.data(), n);
      CHECK(y_ref == y_simd);

      std::vector<double> out_ref(n), out_simd(n);
      ref.sub_scaled(y0.data(), x.data(), a, out_ref.data(), n);
      simd.sub_scaled(y0.data(), x.data(), a, out_simd.data(), n);
      CHECK(out_ref == out_simd);
    }
  }
}

TEST_CASE("SIMD dot agrees with the scalar reference up to rounding") {
  const auto& ref = kernels::scalar_table();
  RngState rng = RngState::new_master(12);
  for (auto backend : simd_backends()) {
    const auto& simd = kernels::table(backend);
    CAPTURE(simd.name);
    for (std::size_t n : {0, 1, 3, 4, 5, 15, 16, 17, 31, 64, 100, 257, 1000}) {
      const auto x = random_vector(rng, n);
      const auto y = random_vector(rng, n);
      double magnitude = 0.0;
      for (std::size_t i = 0; i < n; ++i) magnitude += std::abs(x[i] * y[i]);
      const double tol = 1e-14 * (magnitude + 1.0) * static_cast<double>(n + 1);
      CHECK(std::abs(ref.dot(x.data(), y.data(), n) - simd.dot(x.data(), y.data(), n)) <= tol);
    }
  }
}

TEST_CASE("scalar dot against a hand computed value") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const std::vector<double> y{4.0, -5.0, 6.0};
  CHECK(kernels::scalar_table().dot(x.data(), y.data(), 3) == 12.0);
  CHECK(kernels::dot(x, y) == doctest::Approx(12.0));
}

TEST_CASE("span wrappers reject mismatched lengths") {
  std::vector<double> a(3), b(4), out(3);
  CHECK_THROWS_AS(kernels::dot(a, b), std::invalid_argument);
  CHECK_THROWS_AS(kernels::axpy(1.0, a, b), std::invalid_argument);
  CHECK_THROWS_AS(kernels::sub_scaled(a, b, 1.0, out), std::invalid_argument);
}

TEST_CASE("forcing the scalar backend routes the wrappers through it") {
  const auto before = kernels::active_backend();
  kernels::select(kernels::Backend::scalar);
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::select(before);
  CHECK(kernels::active_backend() == before);
}
