#pragma once

// Checkpoint layout (all integers little-endian):
//
//   bytes 0..3    magic "VLVF"
//   bytes 4..7    format version (u32, currently 1)
//   bytes 8..11   header length L (u32)
//   L bytes       ModelSpec as `key = value` text
//   remainder     parameter blocks in declared order, raw f32 little-endian,
//                 lengths implied by the header's ModelSpec

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "valvenet/model.hpp"

namespace valvenet {

inline constexpr char kCheckpointMagic[4] = {'V', 'L', 'V', 'F'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const Model<float>& model);
Model<float> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path);

/// Throws FormatError: "not a checkpoint" (bad magic), "unsupported version",
/// or "corrupt block '<name>'" when the file ends inside a parameter block.
Model<float> load_checkpoint(const std::filesystem::path& path);

/// As load_checkpoint, but refuses a file whose ModelSpec differs from
/// `expected` before any parameter is read.
Model<float> load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected);

}  // namespace valvenet
