#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dvqn/nn.hpp"

namespace dvqn {

// Flat record container, little-endian on disk:
//   header: magic "DVQN", u32 version (1), u32 record count
//   record: u32 name length, name bytes (UTF-8), u32 ndim, u32 dims...,
//           f64 values (row-major)
struct CheckpointRecord {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<double> values;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const std::vector<CheckpointRecord>& records);
std::vector<CheckpointRecord> load_checkpoint(const std::string& path);

// Parameter matrices become records named after the parameter; n x 1
// matrices get a rank-1 shape.
std::vector<CheckpointRecord> params_to_records(const ParamSet& params);
void records_to_params(const std::vector<CheckpointRecord>& records, ParamSet& params);

std::uint64_t file_digest(const std::string& path);

}  // namespace dvqn
