#pragma once

#include <span>
#include <vector>

namespace ippg {

/// Real-valued signal sampled at `fs` Hz.
struct PulseWaveform {
  std::vector<double> samples;
  double fs = 0.0;

  std::size_t size() const { return samples.size(); }
  double duration() const { return fs > 0 ? static_cast<double>(samples.size()) / fs : 0.0; }
};

/// Linear interpolation of `src` at fractional positions start + k * step,
/// k = 0..count-1. Positions beyond the last sample clamp to it.
std::vector<double> sample_linear(std::span<const double> src, double start, double step,
                                  std::size_t count);

/// Linear resampling onto a `to_hz` grid covering the same duration.
/// Throws EmptyWave for fewer than two samples or non-positive rates.
PulseWaveform resample_ground_truth(const PulseWaveform& wave, double to_hz);

double mean(std::span<const double> x);
/// Population standard deviation.
double stddev(std::span<const double> x);
/// Zero mean, unit population variance; constant input maps to zeros.
std::vector<double> standardize(std::span<const double> x);

}  // namespace ippg
