#pragma once

// Checkpoint file, all integers and reals little-endian:
//
//   offset  size     field
//   0       8        magic "SGDSACKP"
//   8       4        u32 format version (1)
//   12      4        u32 layer count L (entries in layer_sizes)
//   16      4*L      u32 layer sizes
//   ..      4        u32 activation (0 = relu, 1 = tanh)
//   ..      4        u32 epoch (1-based epoch the weights were taken after)
//   ..      8        f64 validation accuracy at that epoch
//   ..      8        u64 config digest (FNV-1a 64 of the resolved run config)
//   ..      8        u64 parameter count M
//   ..      8*M      f64 parameters in the packing order of nn.hpp

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "sgdsa/nn.hpp"

namespace sgdsa {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkSpec spec;
  ParameterVector weights;
  std::uint32_t epoch = 0;
  double val_accuracy = 0.0;
  std::uint64_t config_digest = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view text) noexcept;

}  // namespace sgdsa
