#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "network.hpp"

namespace fckan {

// Binary checkpoint, all integers little-endian:
//   "FCKANCK1"  u32 version (1)
//   u32 spec_len, spec text (NetworkSpec key = value lines)
//   u8 scalar bytes (4 = f32, 8 = f64)
//   u32 count, then per parameter:
//     u32 path_len, path, u32 rows, u32 cols, rows·cols little-endian values
struct CheckpointEntry {
  std::string path;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;
};

struct Checkpoint {
  NetworkSpec spec;
  std::uint8_t scalar_bytes = 4;
  std::vector<CheckpointEntry> entries;
};

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Model<T>& model);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

// Copies checkpoint values into a model built from the same spec. Missing
// paths or shape differences raise errors naming the expected shape.
template <typename T>
void load_parameters(Model<T>& model, const Checkpoint& ckpt);

template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace fckan
