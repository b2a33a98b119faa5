#pragma once

#include <span>
#include <vector>

#include "ippg/waveform.hpp"

namespace ippg {

struct HrBand {
  double low_hz = 0.7;
  double high_hz = 4.0;
};

struct HrEstimate {
  double bpm = 0.0;
  double peak_power = 0.0;
  // In-band bins of the zero-padded spectrum.
  std::vector<double> freqs_hz;
  std::vector<double> power;
};

/// Peak of the Hann-windowed power spectrum, zero-padded to 100x the
/// signal length, restricted to `band`. Throws EmptyWave below 25 samples
/// and NoPowerInBand when every in-band bin is below 1e-20.
HrEstimate estimate_hr(const PulseWaveform& w, HrBand band = {});

/// In-band power spectrum on the same grid estimate_hr uses.
HrEstimate power_spectrum(const PulseWaveform& w, HrBand band = {});

/// Standardizes each window and joins them. Throws MismatchedRates, EmptyInput.
PulseWaveform concat_windows(std::span<const PulseWaveform> windows);

/// Adaptive-threshold beat detection. Throws NoPeaksFound.
std::vector<std::size_t> detect_peaks(const PulseWaveform& w);

struct IbiSeries {
  std::vector<double> ibis_ms;
  std::vector<double> times_s;  // time of the closing beat of each kept interval
  std::size_t discarded = 0;    // intervals outside [250, 1430] ms
};

inline constexpr double kMinIbiMs = 250.0;
inline constexpr double kMaxIbiMs = 1430.0;

/// Successive peak differences in ms. Throws TooFewPeaks below two peaks.
IbiSeries compute_ibi(std::span<const std::size_t> peaks, double fs);

/// Throws TooFewIntervals below three intervals.
double rmssd(std::span<const double> ibis_ms);

/// Power of the tachogram in [0.15, 0.4] Hz, in ms^2. `times_s` holds one
/// timestamp per interval. Throws RecordTooShort below 8 intervals or 30 s.
double hf_power(std::span<const double> ibis_ms, std::span<const double> times_s);

struct PrvMetrics {
  double rmssd_ms = 0.0;
  double hf_power_ms2 = 0.0;
  std::vector<double> ibis_ms;
  std::vector<std::size_t> peak_indices;
};

PrvMetrics prv_metrics(const PulseWaveform& w);

}  // namespace ippg
