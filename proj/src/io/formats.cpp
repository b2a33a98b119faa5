#include "ippg/io/formats.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ippg/error.hpp"

namespace ippg::io {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

[[noreturn]] void bad(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::BadFormat, path.string() + ": " + what);
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void write_landmarks(const fs::path& path, std::span<const LandmarkFrame> frames) {
  std::string text;
  for (const auto& f : frames) {
    json points = json::array(), visible = json::array();
    for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
      points.push_back(f.points[i].x);
      points.push_back(f.points[i].y);
      visible.push_back(f.visible[i] ? 1 : 0);
    }
    text += json{{"frame", f.frame_index}, {"points", points}, {"visible", visible}}.dump() + "\n";
  }
  write_text(path, text);
}

std::vector<LandmarkFrame> read_landmarks(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<LandmarkFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto pts = j.at("points").get<std::vector<double>>();
      const auto vis = j.at("visible").get<std::vector<int>>();
      if (pts.size() != 2 * kDetectedLandmarks || vis.size() != kDetectedLandmarks) {
        bad(path, "line " + std::to_string(lineno) + " does not hold 68 landmarks");
      }
      LandmarkFrame f;
      f.frame_index = j.at("frame").get<std::size_t>();
      for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
        f.points[i] = {pts[2 * i], pts[2 * i + 1]};
        f.visible[i] = vis[i] != 0;
      }
      frames.push_back(f);
    } catch (const json::exception& e) {
      bad(path, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return frames;
}

void write_region_series(const fs::path& path, const RegionSeries& s) {
  std::string out;
  out.append(kSeriesMagic, 4);
  put<std::uint16_t>(out, kSeriesVersion);
  put<std::uint16_t>(out, 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.frames));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.regions));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.channels));
  put<double>(out, s.fs);
  put<double>(out, s.sentinel_value);
  out.append(reinterpret_cast<const char*>(s.sentinel_mask.data()), s.sentinel_mask.size());
  for (double v : s.values) put<float>(out, static_cast<float>(v));
  write_text(path, out);
}

RegionSeries read_region_series(const fs::path& path) {
  const std::string in = read_text(path);
  if (in.size() < kSeriesHeaderBytes || std::memcmp(in.data(), kSeriesMagic, 4) != 0) bad(path, "not a region series file");
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(in, pos);
  if (version != kSeriesVersion) bad(path, "unsupported version " + std::to_string(version));
  pos += 2;
  const auto frames = get<std::uint32_t>(in, pos);
  const auto regions = get<std::uint32_t>(in, pos);
  const auto channels = get<std::uint32_t>(in, pos);
  const double fs = get<double>(in, pos);
  const double sentinel = get<double>(in, pos);
  const std::uint64_t cells = std::uint64_t{frames} * regions;
  const std::uint64_t expect = kSeriesHeaderBytes + cells + cells * channels * 4;
  if (in.size() != expect) bad(path, "payload size does not match the header");
  RegionSeries s(frames, regions, channels, fs, sentinel);
  std::memcpy(s.sentinel_mask.data(), in.data() + pos, cells);
  pos += cells;
  for (double& v : s.values) v = get<float>(in, pos);
  for (auto m : s.sentinel_mask) {
    if (m > 1) bad(path, "mask bytes must be 0 or 1");
  }
  return s;
}

void write_waveform(const fs::path& path, const PulseWaveform& wave) {
  write_text(path, json{{"fs", wave.fs}, {"samples", wave.samples}}.dump() + "\n");
}

PulseWaveform read_waveform(const fs::path& path) {
  try {
    const json j = json::parse(read_text(path));
    PulseWaveform w{j.at("samples").get<std::vector<double>>(), j.at("fs").get<double>()};
    if (!(w.fs > 0.0)) bad(path, "sampling rate must be positive");
    return w;
  } catch (const json::exception& e) {
    bad(path, e.what());
  }
}

}  // namespace ippg::io
