#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tensor.hpp"

namespace fckan {

// IDX container: big-endian magic 0x0000TTNN (TT type code, NN rank), then NN
// big-endian u32 dimensions, then the payload. Only unsigned bytes (0x08).
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::uint32_t magic() const { return 0x00000800u | static_cast<std::uint32_t>(dims.size()); }
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Parse errors name the byte offset where decoding stopped.
IdxArray parse_idx(std::span<const std::uint8_t> bytes,
                   std::optional<std::uint32_t> expected_magic = std::nullopt);
std::vector<std::uint8_t> serialize_idx(const IdxArray& array);

bool is_gzip(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> gzip(std::span<const std::uint8_t> bytes);
// Raw file contents, transparently decompressed when gzip-framed.
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

template <typename T>
T normalize_pixel(std::uint8_t v) {
  return static_cast<T>(static_cast<double>(v) / 255.0);
}

enum class DatasetKind { kMnist, kFashionMnist };

std::string_view name_of(DatasetKind kind);
std::optional<DatasetKind> parse_dataset_kind(std::string_view name);
// Human-readable class names (digits for MNIST).
std::vector<std::string> class_names(DatasetKind kind);

// Images kept as raw bytes; batches are normalized on the way out.
struct Dataset {
  std::string name;
  std::string split;  // "train" or "validation"
  std::size_t features = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;
  std::size_t classes = 10;

  std::size_t size() const noexcept { return labels.size(); }
  // pixel / 255, one row per index.
  template <typename T>
  Tensor<T> batch(std::span<const std::size_t> index) const;
  template <typename T>
  Tensor<T> all() const;
  std::vector<int> labels_at(std::span<const std::size_t> index) const;
  std::vector<std::size_t> class_counts() const;
  Dataset subset(std::span<const std::size_t> index) const;
  void validate() const;
};

Dataset make_dataset(const IdxArray& images, const IdxArray& labels, std::string name,
                     std::string split, std::size_t classes = 10);

// FCKAN_DATA_DIR if set, otherwise ./data.
std::filesystem::path default_data_dir();
// Directory holding one dataset's four files: <root>/mnist or <root>/fashion-mnist.
std::filesystem::path dataset_dir(const std::filesystem::path& root, DatasetKind kind);
// Canonical base file names (without .gz); train images, train labels,
// test images, test labels.
std::vector<std::string> canonical_files();
// Loads one split; "<file>" and "<file>.gz" are both accepted.
Dataset load_split(const std::filesystem::path& root, DatasetKind kind, std::string_view split);

// Class-proportional sample of round(fraction·N) indices, returned sorted.
// Per-class quotas are floor(fraction·n_c) topped up by largest remainder.
std::vector<std::size_t> stratified_indices(std::span<const int> labels, std::size_t classes,
                                            double fraction, std::uint64_t seed);
Dataset stratified_subset(const Dataset& ds, double fraction, std::uint64_t seed);

struct FetchFile {
  std::string name;  // e.g. train-images-idx3-ubyte.gz
  std::uint64_t expected_bytes = 0;
};
std::vector<FetchFile> fetch_manifest(DatasetKind kind);
std::string default_base_url(DatasetKind kind);
// Downloads the four gzip files into dataset_dir(root, kind), checking each
// length. Files already present with the right length are kept.
void fetch_dataset(const std::filesystem::path& root, DatasetKind kind, const std::string& base_url,
                   const std::function<void(const std::string&)>& log = {});

}  // namespace fckan
