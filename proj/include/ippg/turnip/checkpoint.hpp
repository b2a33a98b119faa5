#pragma once

#include <filesystem>
#include <string>

#include "ippg/turnip/params.hpp"

namespace ippg::turnip {

/// Layout: 8-byte magic, u32 format version, u64 manifest size, JSON
/// manifest (config, tensor names, shapes, element offsets), then the
/// little-endian f32 blob.
inline constexpr char kCheckpointMagic[8] = {'T', 'R', 'N', 'P', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TurnipParams params;
  TurnipConfig config;
};

/// Throws IoFailure.
void save_checkpoint(const TurnipParams& params, const TurnipConfig& config,
                     const std::filesystem::path& path);

/// Throws CorruptCheckpoint on bad magic or version, malformed manifest,
/// tensors that disagree with the stored config, or a truncated blob.
/// When `expected` is given its parameter layout must match the file's.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const TurnipConfig* expected = nullptr);

std::string config_to_json(const TurnipConfig& config);
/// Missing keys keep their defaults. Throws ConfigInvalid.
TurnipConfig config_from_json(const std::string& text);

}  // namespace ippg::turnip
