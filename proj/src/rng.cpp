#include "sgdsa/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace sgdsa {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPurposeMul = 0xD1B54A32D192ED03ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string_view purpose_name(Purpose purpose) noexcept {
  switch (purpose) {
    case Purpose::master:
      return "master";
    case Purpose::init:
      return "init";
    case Purpose::shuffle:
      return "shuffle";
    case Purpose::lr_pick:
      return "lr_pick";
    case Purpose::accept:
      return "accept";
    case Purpose::ssa_direction:
      return "ssa_direction";
  }
  return "unknown";
}

RngState::RngState(std::uint64_t seed, Purpose purpose, std::uint64_t key) noexcept : seed_(seed), purpose_(purpose) {
  // SplitMix64 state expansion.
  std::uint64_t z = key;
  for (auto& word : s_) {
    z += kGolden;
    word = mix64(z);
  }
}

RngState RngState::new_master(std::uint64_t seed) noexcept { return RngState(seed, Purpose::master, seed); }

RngState RngState::substream(Purpose purpose, std::uint64_t index) const noexcept {
  const auto code = static_cast<std::uint64_t>(purpose);
  const std::uint64_t key = mix64(mix64(seed_ ^ (code * kPurposeMul)) + index * kGolden);
  return RngState(seed_, purpose, key);
}

std::uint64_t RngState::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  ++draws_;
  return result;
}

double RngState::uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t RngState::choice(std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty choice set");
  const auto range = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return static_cast<std::size_t>(r % range);
  }
}

std::vector<std::size_t> RngState::shuffle(std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = choice(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

double RngState::normal() noexcept {
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sgdsa
