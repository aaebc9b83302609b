#pragma once

// Seeded random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), 256-bit state. A stream is
// keyed by a 64-bit value and its state is filled by four successive
// SplitMix64 outputs starting from that key.
//
// Key derivation, all arithmetic mod 2^64:
//   master stream:       key = seed
//   substream(p, index): key = mix(mix(seed ^ (code(p) * 0xD1B54A32D192ED03)) + index * 0x9E3779B97F4A7C15)
// where mix is the SplitMix64 finalizer and code(p) is the numeric purpose
// value below. Substreams depend only on (seed, purpose, index), never on
// how many draws any other stream has consumed.
//
// Draws:
//   uniform01: (next() >> 11) * 2^-53
//   choice(n): rejection sampling; draw r, reject while r < (2^64 - n) mod n, return r mod n
//   shuffle:   Fisher-Yates from the top; position i swaps with choice(i + 1)
//   normal:    Box-Muller cosine branch, u1 = 1 - uniform01(), u2 = uniform01()

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sgdsa {

enum class Purpose : std::uint64_t {
  master = 0,
  init = 1,
  shuffle = 2,
  lr_pick = 3,
  accept = 4,
  ssa_direction = 5,
};

std::string_view purpose_name(Purpose purpose) noexcept;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

class RngState {
 public:
  static RngState new_master(std::uint64_t seed) noexcept;

  /// Independent stream for one purpose. `index` separates repeated uses of
  /// the same purpose (e.g. one shuffle stream per epoch).
  [[nodiscard]] RngState substream(Purpose purpose, std::uint64_t index = 0) const noexcept;

  std::uint64_t next() noexcept;
  double uniform01() noexcept;
  std::size_t choice(std::size_t n);
  std::vector<std::size_t> shuffle(std::size_t n);
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  Purpose purpose() const noexcept { return purpose_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t draws() const noexcept { return draws_; }

  friend bool operator==(const RngState&, const RngState&) = default;

 private:
  RngState(std::uint64_t seed, Purpose purpose, std::uint64_t key) noexcept;

  std::uint64_t seed_;
  Purpose purpose_;
  std::uint64_t s_[4];
  std::uint64_t draws_ = 0;
};

}  // namespace sgdsa
