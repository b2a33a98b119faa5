#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "ippg/filter.hpp"
#include "ippg/region_series.hpp"
#include "ippg/waveform.hpp"

namespace ippg {

struct NormalizationWarning {
  enum class Kind { ZeroMeanChannel, ConstantChannel } kind;
  std::size_t signal;
};

/// (y - mu) / mu per signal over non-sentinel samples. A signal whose mean is
/// below 1e-12 in magnitude is replaced by sentinels and reported.
RegionSeries ac_dc_normalize(const RegionSeries& series,
                             std::vector<NormalizationWarning>* warnings = nullptr);

/// Affine map of each signal's non-sentinel samples onto [-1, 1]; constant
/// signals map to zeros and are reported.
RegionSeries range_normalize(const RegionSeries& series,
                             std::vector<NormalizationWarning>* warnings = nullptr);

enum class PreprocessStep : std::uint8_t { AcDc, Bandpass, Range };

struct PreprocessConfig {
  BandpassSpec band{};  // fs is taken from the series
  std::vector<PreprocessStep> steps{PreprocessStep::AcDc, PreprocessStep::Bandpass,
                                    PreprocessStep::Range};
};

struct PreprocessReport {
  std::vector<NormalizationWarning> normalization;
  std::vector<FilterWarning> filtering;
};

RegionSeries preprocess_series(const RegionSeries& series, const PreprocessConfig& cfg,
                               PreprocessReport* report = nullptr);

/// Ground-truth conditioning: resample to `fs`, bandpass with the same
/// design, then standardize.
PulseWaveform preprocess_ground_truth(const PulseWaveform& gt, double fs, const BandpassSpec& band);

/// A T-sample slice of a series with its aligned ground truth.
struct Window {
  std::size_t offset = 0;
  RegionSeries data;
  std::vector<double> gt;
  // Full source recording, shared across windows; lets SlowDown read past the window end.
  std::shared_ptr<const RegionSeries> source;
  std::shared_ptr<const std::vector<double>> source_gt;

  bool has_sentinel() const { return data.sentinel_count() > 0; }
};

struct WindowSet {
  std::vector<Window> windows;
  std::size_t length = 0;
  std::size_t stride = 0;
  double fs = 0.0;
};

RegionSeries slice_series(const RegionSeries& series, std::size_t start, std::size_t length);

/// Windows at offsets 0, stride, ... with the last offset <= len - T.
/// `gt` must already be sampled at series.fs; it may not be shorter than the series.
/// Throws SeriesTooShort.
WindowSet make_windows(const RegionSeries& series, const PulseWaveform& gt, std::size_t length,
                       std::size_t stride);

/// SpeedUp: compresses ceil((T - 1) / (1 - c)) + 1 source samples into T, so every
/// frequency scales by 1 / (1 - c). Reads from the window's source recording
/// when it is attached, otherwise from the window itself.
/// Throws SentinelInWindow, WindowOutOfBounds.
Window speedup_augment(const Window& window, double c);

/// SlowDown: stretches ceil((T - 1) / (1 + c)) + 1 samples starting at `start` to T,
/// so every frequency scales by 1 / (1 + c). Throws WindowOutOfBounds,
/// SentinelInWindow.
Window slowdown_augment(const RegionSeries& series, std::span<const double> gt, std::size_t start,
                        double c, std::size_t length);

/// c ~ U[lo, hi) from the given engine.
double draw_augmentation_factor(std::mt19937_64& rng, double lo = 0.2, double hi = 0.4);

}  // namespace ippg
