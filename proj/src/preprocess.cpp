#include "ippg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ippg/error.hpp"

namespace ippg {

namespace {

std::size_t region_of(const RegionSeries& s, std::size_t signal) { return signal / s.channels; }

}  // namespace

RegionSeries ac_dc_normalize(const RegionSeries& series,
                             std::vector<NormalizationWarning>* warnings) {
  RegionSeries out = series;
  for (std::size_t i = 0; i < series.signal_count(); ++i) {
    const std::size_t r = region_of(series, i);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < series.frames; ++t) {
      if (series.is_sentinel(t, r)) continue;
      sum += series.signal(t, i);
      ++n;
    }
    if (n == 0) continue;
    const double mu = sum / static_cast<double>(n);
    if (std::abs(mu) < 1e-12) {
      for (std::size_t t = 0; t < series.frames; ++t) out.set_sentinel(t, r);
      if (warnings) warnings->push_back({NormalizationWarning::Kind::ZeroMeanChannel, i});
      continue;
    }
    for (std::size_t t = 0; t < series.frames; ++t) {
      if (!series.is_sentinel(t, r) && !out.is_sentinel(t, r)) {
        out.signal(t, i) = (series.signal(t, i) - mu) / mu;
      }
    }
  }
  return out;
}

RegionSeries range_normalize(const RegionSeries& series,
                             std::vector<NormalizationWarning>* warnings) {
  RegionSeries out = series;
  for (std::size_t i = 0; i < series.signal_count(); ++i) {
    const std::size_t r = region_of(series, i);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = 0; t < series.frames; ++t) {
      if (series.is_sentinel(t, r)) continue;
      lo = std::min(lo, series.signal(t, i));
      hi = std::max(hi, series.signal(t, i));
    }
    if (lo > hi) continue;  // all sentinel
    const bool constant = hi - lo <= 1e-12 * std::max(1.0, std::abs(hi));
    if (constant && warnings) {
      warnings->push_back({NormalizationWarning::Kind::ConstantChannel, i});
    }
    for (std::size_t t = 0; t < series.frames; ++t) {
      if (series.is_sentinel(t, r)) continue;
      out.signal(t, i) = constant ? 0.0 : 2.0 * (series.signal(t, i) - lo) / (hi - lo) - 1.0;
    }
  }
  return out;
}

RegionSeries preprocess_series(const RegionSeries& series, const PreprocessConfig& cfg,
                               PreprocessReport* report) {
  RegionSeries out = series;
  for (const auto step : cfg.steps) {
    switch (step) {
      case PreprocessStep::AcDc:
        out = ac_dc_normalize(out, report ? &report->normalization : nullptr);
        break;
      case PreprocessStep::Range:
        out = range_normalize(out, report ? &report->normalization : nullptr);
        break;
      case PreprocessStep::Bandpass: {
        BandpassSpec spec = cfg.band;
        spec.fs = series.fs;
        out = filter_series(out, design_bandpass(spec), report ? &report->filtering : nullptr);
        break;
      }
    }
  }
  return out;
}

PulseWaveform preprocess_ground_truth(const PulseWaveform& gt, double fs,
                                      const BandpassSpec& band) {
  PulseWaveform wave = resample_ground_truth(gt, fs);
  BandpassSpec spec = band;
  spec.fs = fs;
  const IirFilter filt = design_bandpass(spec);
  if (wave.samples.size() > 3 * filt.sections.size()) {
    wave.samples = filtfilt(filt, wave.samples, 3 * filt.sections.size());
  }
  wave.samples = standardize(wave.samples);
  return wave;
}

RegionSeries slice_series(const RegionSeries& series, std::size_t start, std::size_t length) {
  RegionSeries out(length, series.regions, series.channels, series.fs, series.sentinel_value);
  const std::size_t row = series.regions * series.channels;
  std::copy_n(series.values.begin() + static_cast<std::ptrdiff_t>(start * row), length * row,
              out.values.begin());
  std::copy_n(series.sentinel_mask.begin() + static_cast<std::ptrdiff_t>(start * series.regions),
              length * series.regions, out.sentinel_mask.begin());
  return out;
}

WindowSet make_windows(const RegionSeries& series, const PulseWaveform& gt, std::size_t length,
                       std::size_t stride) {
  if (length == 0 || stride == 0 || series.frames < length) {
    throw Error(ErrorCode::SeriesTooShort, "series of " + std::to_string(series.frames) +
                                               " samples cannot hold a window of " +
                                               std::to_string(length));
  }
  if (gt.samples.size() < series.frames) {
    throw Error(ErrorCode::SeriesTooShort, "ground truth shorter than the series");
  }
  WindowSet set{{}, length, stride, series.fs};
  auto source = std::make_shared<const RegionSeries>(series);
  auto source_gt = std::make_shared<const std::vector<double>>(gt.samples);
  for (std::size_t offset = 0; offset + length <= series.frames; offset += stride) {
    Window w;
    w.offset = offset;
    w.data = slice_series(series, offset, length);
    w.gt.assign(gt.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                gt.samples.begin() + static_cast<std::ptrdiff_t>(offset + length));
    w.source = source;
    w.source_gt = source_gt;
    set.windows.push_back(std::move(w));
  }
  return set;
}

namespace {

// Resamples every signal of `src` (and `gt`) at positions start + k * step.
Window resample_window(const RegionSeries& src, std::span<const double> gt, double start,
                       double step, std::size_t length, std::size_t offset) {
  Window out;
  out.offset = offset;
  out.data = RegionSeries(length, src.regions, src.channels, src.fs, src.sentinel_value);
  std::vector<double> column(src.frames);
  for (std::size_t i = 0; i < src.signal_count(); ++i) {
    for (std::size_t t = 0; t < src.frames; ++t) column[t] = src.signal(t, i);
    const auto resampled = sample_linear(column, start, step, length);
    for (std::size_t t = 0; t < length; ++t) out.data.signal(t, i) = resampled[t];
  }
  out.gt = sample_linear(gt, start, step, length);
  return out;
}

}  // namespace

namespace {

// Source samples spanned by T outputs read at step `step`.
std::size_t span_for(std::size_t length, double step) {
  if (length == 0) return 0;
  return static_cast<std::size_t>(std::ceil(static_cast<double>(length - 1) * step - 1e-9)) + 1;
}

Window warp(const RegionSeries& series, std::span<const double> gt, std::size_t start, double step,
            std::size_t length, const char* what) {
  const std::size_t span_len = span_for(length, step);
  if (start + span_len > series.frames || start + span_len > gt.size()) {
    throw Error(ErrorCode::WindowOutOfBounds, std::string(what) + " span [" + std::to_string(start) +
                                                  ", " + std::to_string(start + span_len) +
                                                  ") exceeds the series");
  }
  const RegionSeries src = slice_series(series, start, span_len);
  if (src.sentinel_count() > 0) {
    throw Error(ErrorCode::SentinelInWindow, "augmentation requires a sentinel-free span");
  }
  return resample_window(src, gt.subspan(start, span_len), 0.0, step, length, start);
}

}  // namespace

Window speedup_augment(const Window& window, double c) {
  if (window.has_sentinel()) {
    throw Error(ErrorCode::SentinelInWindow, "augmentation requires a sentinel-free window");
  }
  const double step = 1.0 / (1.0 - c);
  if (window.source && window.source_gt) {
    return warp(*window.source, *window.source_gt, window.offset, step, window.data.frames, "speedup");
  }
  Window out = warp(window.data, window.gt, 0, step, window.data.frames, "speedup");
  out.offset = window.offset;
  return out;
}

Window slowdown_augment(const RegionSeries& series, std::span<const double> gt, std::size_t start,
                        double c, std::size_t length) {
  return warp(series, gt, start, 1.0 / (1.0 + c), length, "slowdown");
}

double draw_augmentation_factor(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace ippg
