#include "sgdsa/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_map>

namespace sgdsa {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError(DataError::Kind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) throw DataError(DataError::Kind::truncated, path.string() + ": truncated IDX header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "wrong magic 0x%08X (expected 0x%08X)", got, want);
    throw DataError(DataError::Kind::wrong_magic, path.string() + ": " + buf);
  }
}

// RFC-4180 record splitter: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> split_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (field_started || !field.empty() || !record.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        field.clear();
        record.clear();
        field_started = false;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows != labels.size()) {
    throw DataError(DataError::Kind::count_mismatch, "feature rows and label count differ");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count) {
      throw DataError(DataError::Kind::bad_value, "label at row " + std::to_string(i) + " exceeds class count");
    }
  }
  for (std::size_t k = 0; k < features.data.size(); ++k) {
    if (!std::isfinite(features.data[k])) {
      throw DataError(DataError::Kind::bad_value,
                      "non-finite feature at row " + std::to_string(k / std::max<std::size_t>(features.cols, 1)));
    }
  }
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  check_magic(read_be32(images, 0, images_path), kIdxImagesMagic, images_path);
  check_magic(read_be32(labels, 0, labels_path), kIdxLabelsMagic, labels_path);

  const std::size_t n_images = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t n_labels = read_be32(labels, 4, labels_path);

  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + n_images * pixels) {
    throw DataError(DataError::Kind::truncated, images_path.string() + ": truncated image data");
  }
  if (labels.size() < 8 + n_labels) {
    throw DataError(DataError::Kind::truncated, labels_path.string() + ": truncated label data");
  }
  if (n_images != n_labels) {
    throw DataError(DataError::Kind::count_mismatch, "image count " + std::to_string(n_images) +
                                                         " does not match label count " + std::to_string(n_labels));
  }
  if (n_images == 0) throw DataError(DataError::Kind::no_samples, "no samples");

  Dataset d;
  d.features = Matrix(n_images, pixels);
  for (std::size_t k = 0; k < n_images * pixels; ++k) d.features.data[k] = images[16 + k] / 255.0;
  d.labels.resize(n_images);
  std::size_t top = 0;
  for (std::size_t i = 0; i < n_images; ++i) {
    d.labels[i] = labels[8 + i];
    top = std::max(top, d.labels[i]);
  }
  d.class_count = top + 1;
  for (std::size_t c = 0; c < d.class_count; ++c) d.class_names.push_back(std::to_string(c));
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  const auto bytes = read_file(path);
  try {
    return parse_csv(std::string(bytes.begin(), bytes.end()), label_column);
  } catch (const DataError& e) {
    throw DataError(e.kind(), path.string() + ": " + e.what());
  }
}

Dataset parse_csv(const std::string& text, const std::string& label_column) {
  auto records = split_records(text);
  if (records.empty()) throw DataError(DataError::Kind::no_samples, "missing header row");
  const auto& header = records.front();
  std::size_t label_at = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (trim(header[j]) == label_column) label_at = j;
  }
  if (label_at == header.size()) {
    throw DataError(DataError::Kind::missing_column, "label column '" + label_column + "' not found in header");
  }
  const std::size_t n = records.size() - 1;
  if (n == 0) throw DataError(DataError::Kind::no_samples, "no samples");

  Dataset d;
  d.features = Matrix(n, header.size() - 1);
  d.labels.resize(n);
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    const std::size_t line = i + 2;
    if (rec.size() != header.size()) {
      throw DataError(DataError::Kind::bad_value, "line " + std::to_string(line) + ": expected " +
                                                      std::to_string(header.size()) + " fields, found " +
                                                      std::to_string(rec.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t j = 0; j < rec.size(); ++j) {
      const std::string cell = trim(rec[j]);
      if (j == label_at) {
        auto [it, inserted] = class_index.try_emplace(cell, d.class_names.size());
        if (inserted) d.class_names.push_back(cell);
        d.labels[i] = it->second;
        continue;
      }
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw DataError(DataError::Kind::bad_value, "line " + std::to_string(line) + ", column '" + trim(header[j]) +
                                                        "': not a finite number: '" + cell + "'");
      }
      d.features(i, out_col++) = value;
    }
  }
  d.class_count = d.class_names.size();
  return d;
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.features = Matrix(indices.size(), d.feature_count());
  out.labels.resize(indices.size());
  out.class_count = d.class_count;
  out.class_names = d.class_names;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = d.features.row(indices.at(i));
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels[i] = d.labels[indices[i]];
  }
  return out;
}

SplitIndices split_indices(std::size_t n, double val_fraction, const RngState& master) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw DataError(DataError::Kind::bad_split, "validation fraction must lie in (0,1)");
  }
  const auto scaled = static_cast<std::size_t>(std::floor(static_cast<double>(n) * val_fraction));
  const std::size_t n_val = std::max<std::size_t>(1, scaled);
  if (n_val >= n) {
    throw DataError(DataError::Kind::bad_split, "split of " + std::to_string(n) + " samples leaves the training part empty");
  }
  RngState rng = master.substream(Purpose::shuffle, 0);
  const auto perm = rng.shuffle(n);
  SplitIndices out;
  out.train.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  out.val.assign(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());
  return out;
}

SplitDatasets split(const Dataset& d, double val_fraction, const RngState& master) {
  const auto idx = split_indices(d.size(), val_fraction, master);
  return {subset(d, idx.train), subset(d, idx.val)};
}

Standardizer Standardizer::fit(const Dataset& d) {
  const std::size_t n = d.size();
  const std::size_t f = d.feature_count();
  if (n == 0) throw DataError(DataError::Kind::no_samples, "cannot standardize an empty dataset");
  Standardizer s;
  s.mean.assign(f, 0.0);
  s.scale.assign(f, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) s.mean[j] += d.features(i, j);
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      const double c = d.features(i, j) - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  // Constant features are only centred.
  for (auto& v : s.scale) v = v > 0.0 ? std::sqrt(v / static_cast<double>(n)) : 1.0;
  return s;
}

void Standardizer::apply(Dataset& d) const {
  if (d.feature_count() != mean.size()) throw std::invalid_argument("standardizer fitted on a different feature count");
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < mean.size(); ++j) d.features(i, j) = (d.features(i, j) - mean[j]) / scale[j];
  }
}

std::vector<Minibatch> minibatches(const Dataset& train, std::size_t batch_size, std::size_t epoch,
                                   const RngState& master) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  RngState rng = master.substream(Purpose::shuffle, epoch);
  const auto order = rng.shuffle(train.size());
  std::vector<Minibatch> batches;
  batches.reserve((train.size() + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    Minibatch b;
    b.epoch_index = epoch;
    b.batch_index = batches.size();
    b.sample_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                            order.begin() + static_cast<std::ptrdiff_t>(stop));
    b.inputs = Matrix(b.sample_indices.size(), train.feature_count());
    b.targets.resize(b.sample_indices.size());
    for (std::size_t i = 0; i < b.sample_indices.size(); ++i) {
      const auto src = train.features.row(b.sample_indices[i]);
      std::copy(src.begin(), src.end(), b.inputs.row(i).begin());
      b.targets[i] = train.labels[b.sample_indices[i]];
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace sgdsa
