#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ippg/frame.hpp"
#include "ippg/landmarks.hpp"
#include "ippg/region_series.hpp"
#include "ippg/waveform.hpp"

namespace ippg::io {

struct HrKnot {
  double t_s = 0.0;
  double bpm = 72.0;
};

struct OcclusionEvent {
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;  // inclusive
  std::vector<std::size_t> landmarks;
};

struct SynthConfig {
  double duration_s = 30.0;
  double fps = 25.0;
  double gt_fs = 60.0;
  std::vector<HrKnot> hr_track{{0.0, 72.0}};  // piecewise linear, held past the ends
  std::array<double, 3> pulse_amplitude{0.0066, 0.0154, 0.0106};  // R, G, B relative
  double motion_px = 0.0;  // rigid jitter amplitude
  double noise_std = 0.0;  // per-pixel, in 8-bit levels
  std::vector<OcclusionEvent> occlusions;
  int width = 160;
  int height = 176;
  std::uint64_t seed = 0;

  /// Throws ConfigInvalid.
  void validate() const;
  std::size_t frame_count() const;
};

struct SynthVideo {
  std::vector<Frame> frames;
  std::vector<LandmarkFrame> landmarks;
  PulseWaveform gt;
};

/// Renders a face proxy whose skin pulses as base_c * (1 + a_c * p(t)),
/// p = sin(phi) + 0.4 sin(2 phi + 0.5), phi the integrated heart-rate track.
SynthVideo synth_generate(const SynthConfig& cfg);

/// Pulse shape p at the given times for a track.
std::vector<double> synth_pulse(const std::vector<HrKnot>& track, std::span<const double> times_s);

/// The 68 canonical landmarks in unit face coordinates (x right, y down).
std::array<Vec2, kDetectedLandmarks> canonical_face();

struct RegionClipConfig {
  double duration_s = 45.0;
  double fs = 25.0;
  double gt_fs = 25.0;
  double hr_bpm = 72.0;
  double noise_std = 0.3;       // relative to a unit pulse gain
  std::size_t occluded_regions = 0;  // regions given one sentinel run each
  double occlusion_min_s = 2.0;
  double occlusion_max_s = 8.0;
  std::uint64_t seed = 0;
};

struct RegionClip {
  RegionSeries series;  // single channel
  PulseWaveform gt;
};

/// Region-level clip: region r holds base_r * (1 + 0.01 * (g_r * p(t) + e)), e ~ N(0, noise_std).
RegionClip synth_region_clip(const RegionClipConfig& cfg);

}  // namespace ippg::io
