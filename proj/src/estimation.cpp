#include "ippg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "ippg/error.hpp"

namespace ippg {

namespace {

constexpr double kPi = std::numbers::pi;

// Offsets (percent of the mean envelope) tried by the peak detector.
constexpr double kEnvelopeRaise[] = {5,  10, 15, 20, 25,  30,  40,  50,  60,
                                     70, 80, 90, 100, 110, 120, 150, 200, 300};
constexpr double kMinBpm = 42.0;
constexpr double kMaxBpm = 240.0;

std::vector<double> centered_moving_average(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

// Argmax of every run above the envelope, then a greedy pass that keeps the
// taller of any two peaks closer than `min_distance`.
std::vector<std::size_t> peaks_above(std::span<const double> x, std::span<const double> envelope,
                                     std::size_t min_distance) {
  std::vector<std::size_t> raw;
  std::size_t i = 0;
  while (i < x.size()) {
    if (x[i] <= envelope[i]) {
      ++i;
      continue;
    }
    std::size_t best = i;
    for (; i < x.size() && x[i] > envelope[i]; ++i) {
      if (x[i] > x[best]) best = i;
    }
    raw.push_back(best);
  }
  std::vector<std::size_t> kept;
  for (std::size_t p : raw) {
    if (!kept.empty() && p - kept.back() < min_distance) {
      if (x[p] > x[kept.back()]) kept.back() = p;
      continue;
    }
    kept.push_back(p);
  }
  return kept;
}

double regularity(std::span<const std::size_t> peaks) {
  std::vector<double> ibi;
  for (std::size_t i = 1; i < peaks.size(); ++i) ibi.push_back(double(peaks[i] - peaks[i - 1]));
  const double mu = mean(ibi);
  double ss = 0.0;
  for (std::size_t i = 1; i < ibi.size(); ++i) ss += (ibi[i] - ibi[i - 1]) * (ibi[i] - ibi[i - 1]);
  return std::sqrt(ss / double(ibi.size() - 1)) / mu;
}

// Natural cubic spline through (x, y) evaluated at `at`; x strictly increasing.
std::vector<double> natural_spline(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> at) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);  // second derivatives
  if (n > 2) {
    std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < n - 2; ++i) {
      const double lower = x[i + 1] - x[i];
      const double f = lower / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i-- > 0;) {
      const double next = i + 1 < n - 2 ? m[i + 2] : 0.0;
      m[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
    }
  }
  std::vector<double> out(at.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < at.size(); ++j) {
    const double t = std::clamp(at[j], x.front(), x.back());
    while (k + 2 < n && t > x[k + 1]) ++k;
    const double h = x[k + 1] - x[k];
    const double a = (x[k + 1] - t) / h, b = (t - x[k]) / h;
    out[j] = a * y[k] + b * y[k + 1] +
             ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0;
  }
  return out;
}

// One-sided Welch power spectral density with a periodic Hann window and
// per-segment mean removal.
struct Psd {
  std::vector<double> freqs, density;
};

Psd welch(std::span<const double> x, double fs, std::size_t segment) {
  const std::size_t len = std::min(segment, x.size());
  const std::size_t step = std::max<std::size_t>(1, len / 2);
  std::vector<double> win(len);
  double win_ss = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * double(i) / double(len));
    win_ss += win[i] * win[i];
  }
  const std::size_t bins = len / 2 + 1;
  Psd psd{std::vector<double>(bins), std::vector<double>(bins, 0.0)};
  for (std::size_t k = 0; k < bins; ++k) psd.freqs[k] = double(k) * fs / double(len);
  std::size_t segments = 0;
  std::vector<double> seg(len);
  for (std::size_t start = 0; start + len <= x.size(); start += step, ++segments) {
    const double mu = mean(x.subspan(start, len));
    for (std::size_t i = 0; i < len; ++i) seg[i] = (x[start + i] - mu) * win[i];
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        acc += seg[i] * std::polar(1.0, -2.0 * kPi * double(k * i % len) / double(len));
      }
      const bool edge = k == 0 || (len % 2 == 0 && k == len / 2);
      psd.density[k] += std::norm(acc) / (fs * win_ss) * (edge ? 1.0 : 2.0);
    }
  }
  for (double& d : psd.density) d /= double(segments);
  return psd;
}

}  // namespace

HrEstimate power_spectrum(const PulseWaveform& w, HrBand band) {
  const std::size_t n = w.samples.size();
  if (n < 25) throw Error(ErrorCode::EmptyWave, "need at least 25 samples, got " + std::to_string(n));
  if (!(w.fs > 0.0)) throw Error(ErrorCode::EmptyWave, "sampling rate must be positive");
  // Symmetric Hann window.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = w.samples[i] * (0.5 - 0.5 * std::cos(2.0 * kPi * double(i) / double(n - 1)));
  }
  const double fft_len = 100.0 * double(n);
  const auto k_lo = static_cast<std::size_t>(std::ceil(band.low_hz * fft_len / w.fs - 1e-9));
  const auto k_hi = static_cast<std::size_t>(std::floor(band.high_hz * fft_len / w.fs + 1e-9));
  HrEstimate est;
  for (std::size_t k = k_lo; k <= k_hi && double(k) <= fft_len / 2; ++k) {
    const double omega = 2.0 * kPi * double(k) / fft_len;
    const std::complex<double> rot = std::polar(1.0, -omega);
    std::complex<double> phasor = 1.0, acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * phasor;
      phasor *= rot;
    }
    est.freqs_hz.push_back(double(k) * w.fs / fft_len);
    est.power.push_back(std::norm(acc));
  }
  return est;
}

HrEstimate estimate_hr(const PulseWaveform& w, HrBand band) {
  HrEstimate est = power_spectrum(w, band);
  if (est.power.empty()) throw Error(ErrorCode::NoPowerInBand, "band holds no spectral bins");
  const auto best = std::max_element(est.power.begin(), est.power.end());
  if (!(*best >= 1e-20)) throw Error(ErrorCode::NoPowerInBand, "no power in the heart-rate band");
  est.peak_power = *best;
  est.bpm = 60.0 * est.freqs_hz[static_cast<std::size_t>(best - est.power.begin())];
  return est;
}

PulseWaveform concat_windows(std::span<const PulseWaveform> windows) {
  if (windows.empty()) throw Error(ErrorCode::EmptyInput, "no windows to concatenate");
  PulseWaveform out{{}, windows.front().fs};
  for (const auto& w : windows) {
    if (w.fs != out.fs) {
      throw Error(ErrorCode::MismatchedRates, "windows sampled at " + std::to_string(out.fs) +
                                                  " and " + std::to_string(w.fs) + " Hz");
    }
    const auto z = standardize(w.samples);
    out.samples.insert(out.samples.end(), z.begin(), z.end());
  }
  return out;
}

std::vector<std::size_t> detect_peaks(const PulseWaveform& w) {
  const auto& s = w.samples;
  if (s.size() < 2 || !(w.fs > 0.0)) throw Error(ErrorCode::NoPeaksFound, "waveform too short");
  const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 1e-12 * std::max(1.0, std::abs(*hi_it)))) {
    throw Error(ErrorCode::NoPeaksFound, "constant waveform");
  }
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = 1024.0 * (s[i] - *lo_it) / range;

  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.75 * w.fs)));
  const auto envelope = centered_moving_average(x, window);
  const double env_mean = mean(envelope);
  const auto min_distance =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(60.0 / kMaxBpm * w.fs)));
  const double duration = double(s.size()) / w.fs;

  std::vector<std::size_t> best, fallback;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> raised(x.size());
  for (double pct : kEnvelopeRaise) {
    for (std::size_t i = 0; i < x.size(); ++i) raised[i] = envelope[i] + env_mean * pct / 100.0;
    auto peaks = peaks_above(x, raised, min_distance);
    if (peaks.size() > fallback.size()) fallback = peaks;
    const double bpm = 60.0 * double(peaks.size()) / duration;
    if (peaks.size() < 3 || bpm < kMinBpm || bpm > kMaxBpm) continue;
    const double score = regularity(peaks);
    const bool tie = std::abs(score - best_score) <= 1e-12;
    if ((score < best_score && !tie) || (tie && peaks.size() > best.size())) {
      best_score = std::min(score, best_score);
      best = std::move(peaks);
    }
  }
  if (!best.empty()) return best;
  if (!fallback.empty()) return fallback;
  throw Error(ErrorCode::NoPeaksFound, "no samples rise above the adaptive threshold");
}

IbiSeries compute_ibi(std::span<const std::size_t> peaks, double fs) {
  if (peaks.size() < 2) {
    throw Error(ErrorCode::TooFewPeaks, "need two peaks, got " + std::to_string(peaks.size()));
  }
  IbiSeries out;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const double ibi = (double(peaks[i]) - double(peaks[i - 1])) * 1000.0 / fs;
    if (ibi < kMinIbiMs || ibi > kMaxIbiMs) {
      ++out.discarded;
      continue;
    }
    out.ibis_ms.push_back(ibi);
    out.times_s.push_back(double(peaks[i]) / fs);
  }
  return out;
}

double rmssd(std::span<const double> ibis_ms) {
  if (ibis_ms.size() < 3) {
    throw Error(ErrorCode::TooFewIntervals, "need three intervals, got " + std::to_string(ibis_ms.size()));
  }
  double ss = 0.0;
  for (std::size_t i = 1; i < ibis_ms.size(); ++i) {
    const double d = ibis_ms[i] - ibis_ms[i - 1];
    ss += d * d;
  }
  return std::sqrt(ss / double(ibis_ms.size() - 1));
}

double hf_power(std::span<const double> ibis_ms, std::span<const double> times_s) {
  if (ibis_ms.size() != times_s.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one timestamp per interval required");
  }
  if (ibis_ms.size() < 8) {
    throw Error(ErrorCode::RecordTooShort, "need 8 intervals, got " + std::to_string(ibis_ms.size()));
  }
  const double span_s = times_s.back() - times_s.front();
  if (span_s < 30.0) {
    throw Error(ErrorCode::RecordTooShort, "intervals span " + std::to_string(span_s) + " s, need 30");
  }
  constexpr double kGridHz = 4.0;
  std::vector<double> grid;
  for (double t = times_s.front(); t <= times_s.back(); t += 1.0 / kGridHz) grid.push_back(t);
  auto tach = natural_spline(times_s, ibis_ms, grid);
  const double mu = mean(tach);
  for (double& v : tach) v -= mu;

  const Psd psd = welch(tach, kGridHz, 128);
  const double df = psd.freqs.size() > 1 ? psd.freqs[1] - psd.freqs[0] : 0.0;
  double power = 0.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (psd.freqs[k] >= 0.15 && psd.freqs[k] <= 0.4) power += psd.density[k] * df;
  }
  return std::max(0.0, power);
}

PrvMetrics prv_metrics(const PulseWaveform& w) {
  PrvMetrics m;
  m.peak_indices = detect_peaks(w);
  const IbiSeries ibi = compute_ibi(m.peak_indices, w.fs);
  m.ibis_ms = ibi.ibis_ms;
  m.rmssd_ms = rmssd(ibi.ibis_ms);
  m.hf_power_ms2 = hf_power(ibi.ibis_ms, ibi.times_s);
  return m;
}

}  // namespace ippg
