#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ippg/landmarks.hpp"
#include "ippg/region_series.hpp"
#include "ippg/waveform.hpp"

namespace ippg::io {

namespace fs = std::filesystem;

/// One JSON object per frame: {"frame": i, "points": [x0, y0, ...], "visible": [0|1, ...]}.
/// Readers throw IoFailure or BadFormat.
void write_landmarks(const fs::path& path, std::span<const LandmarkFrame> frames);
std::vector<LandmarkFrame> read_landmarks(const fs::path& path);

/// Binary region series: 36-byte header (magic "IPRS", u16 version, u16
/// reserved, u32 frames, u32 regions, u32 channels, f64 fs, f64 sentinel)
/// followed by the frames x regions mask bytes and the f32 values, all little-endian.
inline constexpr char kSeriesMagic[4] = {'I', 'P', 'R', 'S'};
inline constexpr std::uint16_t kSeriesVersion = 1;
inline constexpr std::size_t kSeriesHeaderBytes = 36;
void write_region_series(const fs::path& path, const RegionSeries& series);
RegionSeries read_region_series(const fs::path& path);

/// {"fs": Hz, "samples": [...]}
void write_waveform(const fs::path& path, const PulseWaveform& wave);
PulseWaveform read_waveform(const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace ippg::io
