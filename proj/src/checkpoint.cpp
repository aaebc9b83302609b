#include "sgdsa/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace sgdsa {
namespace {

constexpr char kMagic[8] = {'S', 'G', 'D', 'S', 'A', 'C', 'K', 'P'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool magic_matches() {
    need(sizeof kMagic);
    const bool ok = std::memcmp(bytes_.data(), kMagic, sizeof kMagic) == 0;
    pos_ += sizeof kMagic;
    return ok;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint truncated at byte " + std::to_string(pos_));
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.spec.validate();
  if (ckpt.weights.size() != ckpt.spec.parameter_count()) {
    throw std::invalid_argument("checkpoint weights do not match the network shape");
  }
  Writer out;
  out.raw(kMagic, sizeof kMagic);
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(ckpt.spec.layer_sizes.size()));
  for (std::size_t n : ckpt.spec.layer_sizes) out.u32(static_cast<std::uint32_t>(n));
  out.u32(ckpt.spec.activation == Activation::relu ? 0 : 1);
  out.u32(ckpt.epoch);
  out.f64(ckpt.val_accuracy);
  out.u64(ckpt.config_digest);
  out.u64(ckpt.weights.size());
  for (double v : ckpt.weights.values) out.f64(v);
  return out.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  if (!in.magic_matches()) throw std::runtime_error("not a checkpoint file (bad magic)");
  if (const auto version = in.u32(); version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t layers = in.u32();
  if (layers < 2 || layers > 4096) throw std::runtime_error("checkpoint has implausible layer count");
  for (std::uint32_t l = 0; l < layers; ++l) ckpt.spec.layer_sizes.push_back(in.u32());
  const std::uint32_t act = in.u32();
  if (act > 1) throw std::runtime_error("checkpoint has unknown activation code " + std::to_string(act));
  ckpt.spec.activation = act == 0 ? Activation::relu : Activation::tanh;
  ckpt.spec.validate();
  ckpt.epoch = in.u32();
  ckpt.val_accuracy = in.f64();
  ckpt.config_digest = in.u64();
  const std::uint64_t count = in.u64();
  if (count != ckpt.spec.parameter_count()) throw std::runtime_error("checkpoint parameter count does not match its network");
  if (in.remaining() != count * 8) throw std::runtime_error("checkpoint payload size mismatch");
  ckpt.weights.values.resize(count);
  for (auto& v : ckpt.weights.values) {
    v = in.f64();
    if (!std::isfinite(v)) throw std::runtime_error("checkpoint contains a non-finite parameter");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace sgdsa
