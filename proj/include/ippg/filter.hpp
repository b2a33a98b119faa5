#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ippg/region_series.hpp"

namespace ippg {

struct BandpassSpec {
  int order = 5;
  double low_hz = 0.7;
  double high_hz = 4.0;
  double fs = 25.0;
};

/// Biquad y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2) x.
struct SecondOrderSection {
  double b0, b1, b2, a1, a2;
};

struct IirFilter {
  std::vector<SecondOrderSection> sections;

  std::complex<double> response(double freq_hz, double fs) const;
  /// Largest pole radius per section.
  std::vector<double> pole_radii() const;
  bool stable() const;
};

/// Butterworth bandpass: analog prototype, lowpass-to-bandpass transform,
/// bilinear transform with prewarped band edges, unity gain at the
/// geometric band center. Throws InvalidBand.
IirFilter design_bandpass(const BandpassSpec& spec);

/// Single pass through the cascade. `zero_state_scale` seeds each section's
/// state with its step-response steady state times that value.
std::vector<double> sosfilt(const IirFilter& filt, std::span<const double> x,
                            double zero_state_scale = 0.0);

/// Forward-backward filtering with odd-reflection padding of `pad` samples
/// and steady-state initial conditions.
std::vector<double> filtfilt(const IirFilter& filt, std::span<const double> x, std::size_t pad);

struct FilterWarning {
  std::size_t signal;  // region * channels + channel
  std::size_t start;
  std::size_t length;
};

/// Zero-phase filtering of every maximal non-sentinel run of every signal.
/// Runs shorter than 4 samples are copied unfiltered and reported.
/// Throws SeriesTooShort when the series has no more than 3 * sections samples.
RegionSeries filter_series(const RegionSeries& series, const IirFilter& filt,
                           std::vector<FilterWarning>* warnings = nullptr);

}  // namespace ippg
