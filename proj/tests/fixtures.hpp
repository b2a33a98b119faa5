#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ippg/io/synth.hpp"
#include "ippg/landmarks.hpp"
#include "ippg/waveform.hpp"

namespace ippg::testing {

inline constexpr double kPi = std::numbers::pi;

/// Canonical face mapped to pixels, all points visible.
inline LandmarkFrame frontal_face(double scale = 100.0, Vec2 center = {200.0, 200.0},
                                  std::size_t index = 0) {
  LandmarkFrame f;
  f.frame_index = index;
  const auto unit = io::canonical_face();
  for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
    f.points[i] = center + scale * unit[i];
    f.visible[i] = true;
  }
  return f;
}

inline std::vector<double> sine(double freq_hz, double fs, std::size_t n, double amp = 1.0,
                                double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = amp * std::sin(2.0 * kPi * freq_hz * double(t) / fs + phase);
  return x;
}

inline PulseWaveform sine_wave(double freq_hz, double fs, std::size_t n, double amp = 1.0,
                               double phase = 0.0) {
  return {sine(freq_hz, fs, n, amp, phase), fs};
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ippg_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace ippg::testing
