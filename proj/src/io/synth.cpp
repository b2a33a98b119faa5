#include "ippg/io/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ippg/error.hpp"

namespace ippg::io {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHarmonicPhase = 0.5;
constexpr std::array<double, 3> kSkin{185.0, 125.0, 105.0};
constexpr std::array<double, 3> kBackground{70.0, 75.0, 80.0};
constexpr std::array<double, 3> kEye{45.0, 35.0, 35.0};
constexpr std::array<double, 3> kBrow{60.0, 45.0, 35.0};
constexpr std::array<double, 3> kLip{150.0, 70.0, 70.0};

// Integral of the heart-rate track (in cycles) from 0 to t.
double cycles(const std::vector<HrKnot>& track, double t) {
  const double f0 = track.front().bpm / 60.0;
  if (t <= track.front().t_s) return f0 * t;
  double acc = f0 * track.front().t_s;
  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    const double a = track[i].t_s, b = track[i + 1].t_s;
    const double fa = track[i].bpm / 60.0, fb = track[i + 1].bpm / 60.0;
    const double end = std::min(t, b);
    const double tau = end - a;
    const double slope = b > a ? (fb - fa) / (b - a) : 0.0;
    acc += fa * tau + 0.5 * slope * tau * tau;
    if (t <= b) return acc;
  }
  return acc + track.back().bpm / 60.0 * (t - track.back().t_s);
}

double pulse_at(const std::vector<HrKnot>& track, double t) {
  const double phi = 2.0 * kPi * cycles(track, t);
  return std::sin(phi) + 0.4 * std::sin(2.0 * phi + kHarmonicPhase);
}

bool inside_ellipse(Vec2 u, Vec2 c, double rx, double ry) {
  const double dx = (u.x - c.x) / rx, dy = (u.y - c.y) / ry;
  return dx * dx + dy * dy <= 1.0;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (!(duration_s > 0.0) || !(fps > 0.0) || !(gt_fs > 0.0)) fail("duration and rates must be positive");
  if (hr_track.empty()) fail("heart-rate track is empty");
  double max_f = 0.0;
  for (std::size_t i = 0; i < hr_track.size(); ++i) {
    const auto& k = hr_track[i];
    if (k.bpm < 42.0 || k.bpm > 240.0) fail("heart rate must lie in [42, 240] bpm");
    if (i > 0 && k.t_s < hr_track[i - 1].t_s) fail("heart-rate knots must be time-ordered");
    max_f = std::max(max_f, k.bpm / 60.0);
  }
  if (fps <= 2.0 * max_f) fail("frame rate must exceed twice the highest pulse frequency");
  if (width < 32 || height < 32) fail("frames must be at least 32 x 32");
  if (motion_px < 0.0 || noise_std < 0.0) fail("motion and noise must be non-negative");
  for (const auto& o : occlusions) {
    if (o.first_frame > o.last_frame) fail("occlusion range is reversed");
    for (auto l : o.landmarks) {
      if (l >= kDetectedLandmarks) fail("occluded landmark index out of range");
    }
  }
}

std::size_t SynthConfig::frame_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * fps));
}

std::array<Vec2, kDetectedLandmarks> canonical_face() {
  std::array<Vec2, kDetectedLandmarks> p{};
  for (int k = 0; k <= 16; ++k) {
    p[k] = {-0.9 * std::cos(kPi * k / 16.0), -0.05 + std::sin(kPi * k / 16.0)};
  }
  for (int k = 0; k < 5; ++k) {
    const double x = -0.75 + 0.15 * k;
    const double arch = -0.04 * std::sin(kPi * (k + 0.5) / 5.0);
    p[17 + k] = {x, -0.45 + arch};
    p[26 - k] = {-x, -0.45 + arch};
  }
  for (int k = 0; k < 4; ++k) p[27 + k] = {0.0, -0.3 + 0.11 * k};
  for (int k = 0; k < 5; ++k) p[31 + k] = {-0.15 + 0.075 * k, 0.15 + (k == 2 ? 0.03 : 0.0)};
  const std::array<Vec2, 6> eye{{{-0.58, -0.25}, {-0.47, -0.31}, {-0.33, -0.31},
                                 {-0.22, -0.25}, {-0.33, -0.19}, {-0.47, -0.19}}};
  for (int k = 0; k < 6; ++k) p[36 + k] = eye[k];
  // Right eye starts at its inner corner and runs clockwise in the image.
  const std::array<int, 6> mirror{3, 2, 1, 0, 5, 4};
  for (int k = 0; k < 6; ++k) p[42 + k] = {-eye[mirror[k]].x, eye[mirror[k]].y};
  const std::array<Vec2, 12> outer{{{-0.3, 0.5}, {-0.2, 0.43}, {-0.08, 0.4}, {0.0, 0.42},
                                    {0.08, 0.4}, {0.2, 0.43}, {0.3, 0.5}, {0.2, 0.58},
                                    {0.08, 0.61}, {0.0, 0.62}, {-0.08, 0.61}, {-0.2, 0.58}}};
  for (int k = 0; k < 12; ++k) p[48 + k] = outer[k];
  const std::array<Vec2, 8> inner{{{-0.25, 0.5}, {-0.08, 0.46}, {0.0, 0.47}, {0.08, 0.46},
                                   {0.25, 0.5}, {0.08, 0.54}, {0.0, 0.55}, {-0.08, 0.54}}};
  for (int k = 0; k < 8; ++k) p[60 + k] = inner[k];
  return p;
}

std::vector<double> synth_pulse(const std::vector<HrKnot>& track, std::span<const double> times_s) {
  std::vector<double> out(times_s.size());
  for (std::size_t i = 0; i < times_s.size(); ++i) out[i] = pulse_at(track, times_s[i]);
  return out;
}

SynthVideo synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double ph1 = phase(rng), ph2 = phase(rng), ph3 = phase(rng), tex_ph = phase(rng);
  std::normal_distribution<double> noise(0.0, 1.0);

  const double scale = 0.42 * std::min(cfg.width, cfg.height);
  const Vec2 center{0.5 * cfg.width, 0.52 * cfg.height};
  const auto face = canonical_face();
  const Vec2 left_eye{-0.4, -0.25}, right_eye{0.4, -0.25};

  auto texture = [tex_ph](Vec2 u) {
    return 0.05 * std::sin(7.1 * u.x + tex_ph) * std::cos(5.3 * u.y + 0.7) +
           0.03 * std::sin(13.0 * u.x + 11.0 * u.y + 2.0 * tex_ph);
  };

  SynthVideo out;
  const std::size_t n = cfg.frame_count();
  out.frames.reserve(n);
  out.landmarks.reserve(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double t = double(f) / cfg.fps;
    const Vec2 shift{cfg.motion_px * std::sin(2.0 * kPi * 0.31 * t + ph1),
                     0.7 * cfg.motion_px * std::sin(2.0 * kPi * 0.17 * t + ph2)};
    const double theta = cfg.motion_px / (4.0 * scale) * std::sin(2.0 * kPi * 0.13 * t + ph3);
    const double c = std::cos(theta), s = std::sin(theta);
    auto to_image = [&](Vec2 u) {
      return Vec2{center.x + shift.x + scale * (c * u.x - s * u.y),
                  center.y + shift.y + scale * (s * u.x + c * u.y)};
    };
    auto to_face = [&](Vec2 px) {
      const double dx = (px.x - center.x - shift.x) / scale, dy = (px.y - center.y - shift.y) / scale;
      return Vec2{c * dx + s * dy, -s * dx + c * dy};
    };

    LandmarkFrame lm;
    lm.frame_index = f;
    for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
      lm.points[i] = to_image(face[i]);
      lm.visible[i] = true;
    }
    for (const auto& o : cfg.occlusions) {
      if (f < o.first_frame || f > o.last_frame) continue;
      for (auto l : o.landmarks) lm.visible[l] = false;
    }
    out.landmarks.push_back(lm);

    const double p = pulse_at(cfg.hr_track, t);
    Frame frame(cfg.width, cfg.height, 3);
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        const Vec2 u = to_face({x + 0.5, y + 0.5});
        std::array<double, 3> rgb = kBackground;
        if (inside_ellipse(u, {0.0, -0.05}, 1.05, 1.1)) {
          const double tex = 1.0 + texture(u);
          for (int ch = 0; ch < 3; ++ch) rgb[ch] = kSkin[ch] * tex * (1.0 + cfg.pulse_amplitude[ch] * p);
          const bool brow = std::abs(u.y + 0.47) < 0.03 && std::abs(u.x) > 0.15 && std::abs(u.x) < 0.75;
          if (inside_ellipse(u, left_eye, 0.17, 0.07) || inside_ellipse(u, right_eye, 0.17, 0.07)) {
            rgb = kEye;
          } else if (brow) {
            rgb = kBrow;
          } else if (inside_ellipse(u, {0.0, 0.51}, 0.3, 0.1)) {
            rgb = kLip;
          }
        }
        for (int ch = 0; ch < 3; ++ch) {
          const double v = rgb[ch] + (cfg.noise_std > 0.0 ? cfg.noise_std * noise(rng) : 0.0);
          frame.at(x, y, ch) = float(std::clamp(v, 0.0, 255.0));
        }
      }
    }
    out.frames.push_back(std::move(frame));
  }

  const auto gt_n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.gt_fs));
  std::vector<double> times(gt_n);
  for (std::size_t i = 0; i < gt_n; ++i) times[i] = double(i) / cfg.gt_fs;
  out.gt = {synth_pulse(cfg.hr_track, times), cfg.gt_fs};
  return out;
}

RegionClip synth_region_clip(const RegionClipConfig& cfg) {
  if (!(cfg.duration_s > 0.0) || !(cfg.fs > 0.0) || !(cfg.gt_fs > 0.0) || cfg.hr_bpm < 42.0 ||
      cfg.hr_bpm > 240.0 || cfg.occluded_regions > kRegionCount || cfg.noise_std < 0.0 ||
      cfg.occlusion_min_s > cfg.occlusion_max_s) {
    throw Error(ErrorCode::ConfigInvalid, "invalid region clip config");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> base_dist(60.0, 200.0), gain_dist(0.5, 1.5);
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  const std::vector<HrKnot> track{{0.0, cfg.hr_bpm}};
  const double offset = std::uniform_real_distribution<double>(0.0, 10.0)(rng);

  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fs));
  RegionClip clip{RegionSeries(n, kRegionCount, 1, cfg.fs), {}};
  std::array<double, kRegionCount> base{}, gain{};
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    base[r] = base_dist(rng);
    gain[r] = gain_dist(rng);
  }
  for (std::size_t t = 0; t < n; ++t) {
    const double p = pulse_at(track, offset + double(t) / cfg.fs);
    for (std::size_t r = 0; r < kRegionCount; ++r) {
      clip.series.at(t, r) = base[r] * (1.0 + 0.01 * (gain[r] * p + noise(rng)));
    }
  }

  std::vector<std::size_t> regions(kRegionCount);
  for (std::size_t r = 0; r < kRegionCount; ++r) regions[r] = r;
  std::shuffle(regions.begin(), regions.end(), rng);
  std::uniform_real_distribution<double> len_dist(cfg.occlusion_min_s, cfg.occlusion_max_s);
  for (std::size_t k = 0; k < cfg.occluded_regions; ++k) {
    const auto len = std::min(n, static_cast<std::size_t>(std::llround(len_dist(rng) * cfg.fs)));
    const auto start = std::uniform_int_distribution<std::size_t>(0, n - len)(rng);
    for (std::size_t t = start; t < start + len; ++t) clip.series.set_sentinel(t, regions[k]);
  }

  const auto gt_n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.gt_fs));
  std::vector<double> times(gt_n);
  for (std::size_t i = 0; i < gt_n; ++i) times[i] = offset + double(i) / cfg.gt_fs;
  clip.gt = {synth_pulse(track, times), cfg.gt_fs};
  return clip;
}

}  // namespace ippg::io
