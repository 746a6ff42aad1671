#pragma once

// Checkpoint file layout (all integers little-endian):
//
//   "MSEG"  u32 version  u32 flags(bit 0 = dilated)  u32 in_channels
//   f32 input_mean  f32 input_std  u32 entry_count
//   entry_count x { u32 name_len, name bytes, u32 rank, u32 dims[rank], u64 offset }
//   u64 float_count  float_count x f32
//
// offsets count floats from the start of the payload. Each conv layer
// contributes "<layer>.weight" [out, in, k, k] and "<layer>.bias" [out].

#include <cstdint>
#include <filesystem>
#include <vector>

#include "footseg/net/model.hpp"

namespace footseg::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const MiniSegNet<float>& net);
// Throws std::runtime_error on a bad magic, version, manifest or size.
MiniSegNet<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const MiniSegNet<float>& net);
MiniSegNet<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace footseg::net
