#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "ippg/frame.hpp"

namespace ippg::io {

/// Raw frame container. 24-byte little-endian header: magic "IPG1", u16
/// version, u32 width, u32 height, u8 channels, f32 fps, u32 frame count,
/// u8 pixel type; then frames row-major with interleaved channels.
inline constexpr char kFrameMagic[4] = {'I', 'P', 'G', '1'};
inline constexpr std::uint16_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 24;

enum class PixelType : std::uint8_t { U8 = 0, F32 = 1 };

struct FrameHeader {
  std::uint16_t version = kFrameVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t channels = 0;
  float fps = 0.0f;
  std::uint32_t frame_count = 0;
  PixelType pixel_type = PixelType::U8;

  std::size_t frame_bytes() const;
};

/// Streams frames to a container; the frame count is patched on close().
/// U8 samples are rounded and clamped to [0, 255].
class FrameWriter {
 public:
  FrameWriter(const std::filesystem::path& path, int width, int height, int channels, double fps,
              PixelType type);
  ~FrameWriter();
  void append(const Frame& frame);
  void close();

 private:
  std::ofstream out_;
  FrameHeader header_;
  std::filesystem::path path_;
  bool closed_ = false;
};

void write_frames(const std::filesystem::path& path, const FrameSource& frames, PixelType type);

/// Random-access reader. Validates magic, version and payload size on open
/// (BadFormat). U8 samples are returned as floats in [0, 255].
class FileFrameSource final : public FrameSource {
 public:
  explicit FileFrameSource(const std::filesystem::path& path);

  std::size_t frame_count() const override { return header_.frame_count; }
  int width() const override { return int(header_.width); }
  int height() const override { return int(header_.height); }
  int channels() const override { return header_.channels; }
  double fps() const override { return header_.fps; }
  Frame frame(std::size_t index) const override;
  const FrameHeader& header() const { return header_; }

 private:
  mutable std::ifstream in_;
  mutable std::mutex mu_;
  FrameHeader header_;
};

}  // namespace ippg::io
