#include "ippg/io/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "ippg/error.hpp"

namespace ippg::io {

namespace {

std::string encode(const FrameHeader& h) {
  std::string out(kFrameHeaderBytes, '\0');
  char* p = out.data();
  auto put = [&p](const auto& v) {
    std::memcpy(p, &v, sizeof v);
    p += sizeof v;
  };
  std::memcpy(p, kFrameMagic, 4);
  p += 4;
  put(h.version);
  put(h.width);
  put(h.height);
  put(h.channels);
  put(h.fps);
  put(h.frame_count);
  put(static_cast<std::uint8_t>(h.pixel_type));
  return out;
}

}  // namespace

std::size_t FrameHeader::frame_bytes() const {
  return std::size_t(width) * height * channels * (pixel_type == PixelType::U8 ? 1 : 4);
}

FrameWriter::FrameWriter(const std::filesystem::path& path, int width, int height, int channels,
                         double fps, PixelType type)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  if (width <= 0 || height <= 0 || channels <= 0 || channels > 255 || !(fps > 0.0)) {
    throw Error(ErrorCode::BadFormat, "invalid frame geometry");
  }
  header_.width = std::uint32_t(width);
  header_.height = std::uint32_t(height);
  header_.channels = std::uint8_t(channels);
  header_.fps = float(fps);
  header_.pixel_type = type;
  const std::string h = encode(header_);
  out_.write(h.data(), std::streamsize(h.size()));
}

FrameWriter::~FrameWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void FrameWriter::append(const Frame& f) {
  if (std::uint32_t(f.width) != header_.width || std::uint32_t(f.height) != header_.height ||
      f.channels != header_.channels) {
    throw Error(ErrorCode::ShapeMismatch, "frame geometry differs from the container");
  }
  if (header_.pixel_type == PixelType::U8) {
    std::vector<std::uint8_t> buf(f.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
      buf[i] = std::uint8_t(std::clamp(std::lround(f.data[i]), 0L, 255L));
    }
    out_.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  } else {
    out_.write(reinterpret_cast<const char*>(f.data.data()), std::streamsize(f.data.size() * 4));
  }
  ++header_.frame_count;
}

void FrameWriter::close() {
  closed_ = true;
  out_.seekp(0);
  const std::string h = encode(header_);
  out_.write(h.data(), std::streamsize(h.size()));
  out_.close();
  if (!out_) throw Error(ErrorCode::IoFailure, "write failed for " + path_.string());
}

void write_frames(const std::filesystem::path& path, const FrameSource& frames, PixelType type) {
  FrameWriter w(path, frames.width(), frames.height(), frames.channels(), frames.fps(), type);
  for (std::size_t i = 0; i < frames.frame_count(); ++i) w.append(frames.frame(i));
  w.close();
}

FileFrameSource::FileFrameSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  char raw[kFrameHeaderBytes];
  if (!in_.read(raw, kFrameHeaderBytes)) throw Error(ErrorCode::BadFormat, path.string() + ": truncated header");
  if (std::memcmp(raw, kFrameMagic, 4) != 0) throw Error(ErrorCode::BadFormat, path.string() + ": bad magic");
  const char* p = raw + 4;
  auto get = [&p](auto& v) {
    std::memcpy(&v, p, sizeof v);
    p += sizeof v;
  };
  std::uint8_t type = 0;
  get(header_.version);
  get(header_.width);
  get(header_.height);
  get(header_.channels);
  get(header_.fps);
  get(header_.frame_count);
  get(type);
  if (header_.version != kFrameVersion) {
    throw Error(ErrorCode::BadFormat, path.string() + ": unsupported version");
  }
  if (type > 1) throw Error(ErrorCode::BadFormat, path.string() + ": unknown pixel type");
  header_.pixel_type = PixelType(type);
  const auto size = std::filesystem::file_size(path);
  if (size != kFrameHeaderBytes + std::uint64_t(header_.frame_bytes()) * header_.frame_count) {
    throw Error(ErrorCode::BadFormat, path.string() + ": payload size does not match the header");
  }
}

Frame FileFrameSource::frame(std::size_t index) const {
  if (index >= header_.frame_count) throw Error(ErrorCode::BadFormat, "frame index out of range");
  Frame f(int(header_.width), int(header_.height), header_.channels);
  const std::size_t bytes = header_.frame_bytes();
  std::vector<char> buf(bytes);
  {
    std::lock_guard lock(mu_);
    in_.seekg(std::streamoff(kFrameHeaderBytes + index * bytes));
    if (!in_.read(buf.data(), std::streamsize(bytes))) {
      throw Error(ErrorCode::IoFailure, "short read in frame " + std::to_string(index));
    }
  }
  if (header_.pixel_type == PixelType::U8) {
    for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = float(std::uint8_t(buf[i]));
  } else {
    std::memcpy(f.data.data(), buf.data(), bytes);
  }
  return f;
}

}  // namespace ippg::io
