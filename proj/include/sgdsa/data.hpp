#pragma once

// Dataset ingestion (IDX, CSV), train/validation split, per-epoch minibatches.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdsa/matrix.hpp"
#include "sgdsa/rng.hpp"

namespace sgdsa {

class DataError : public std::runtime_error {
 public:
  enum class Kind { io, wrong_magic, truncated, count_mismatch, missing_column, bad_value, no_samples, bad_split };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Dataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;
  /// Original label text per class index (CSV) or the decimal digit (IDX).
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_count() const noexcept { return features.cols; }
  /// Throws DataError unless labels are in range and features finite.
  void validate() const;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// MNIST-layout IDX pair; pixels are scaled by 1/255.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Header row required. Labels become dense indices in first-appearance order.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);
Dataset parse_csv(const std::string& text, const std::string& label_column);

/// Rows `indices` of `d`, in that order.
Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Validation size is max(1, floor(n * val_fraction)); both parts must be non-empty.
/// Uses the shuffle substream (index 0) of `master`.
SplitIndices split_indices(std::size_t n, double val_fraction, const RngState& master);

struct SplitDatasets {
  Dataset train;
  Dataset val;
};

SplitDatasets split(const Dataset& d, double val_fraction, const RngState& master);

/// Per-feature mean and standard deviation.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& d);
  void apply(Dataset& d) const;
};

/// Epoch `epoch` (1-based) shuffles with the shuffle substream `epoch` of
/// `master`; ceil(n / batch_size) batches, the last one possibly short.
std::vector<Minibatch> minibatches(const Dataset& train, std::size_t batch_size, std::size_t epoch,
                                   const RngState& master);

}  // namespace sgdsa
