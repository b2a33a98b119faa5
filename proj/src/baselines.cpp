#include "ippg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ippg/error.hpp"

namespace ippg {

namespace {

constexpr double kPosWindowSeconds = 1.6;

struct Rgb {
  std::vector<double> r, g, b;
};

Rgb region_channels(const RegionSeries& s, std::size_t region, std::size_t start, std::size_t len) {
  Rgb c{std::vector<double>(len), std::vector<double>(len), std::vector<double>(len)};
  for (std::size_t t = 0; t < len; ++t) {
    c.r[t] = s.at(start + t, region, 0);
    c.g[t] = s.at(start + t, region, 1);
    c.b[t] = s.at(start + t, region, 2);
  }
  return c;
}

void check_region(const RegionSeries& s, std::size_t region) {
  if (s.channels != 3) throw Error(ErrorCode::ShapeMismatch, "baselines need R, G, B channels");
  if (region >= s.regions) throw Error(ErrorCode::ShapeMismatch, "region index out of range");
  for (std::size_t t = 0; t < s.frames; ++t) {
    if (s.is_sentinel(t, region)) {
      throw Error(ErrorCode::SentinelInWindow,
                  "region " + std::to_string(region) + " is occluded at frame " + std::to_string(t));
    }
  }
}

void divide_by_mean(std::vector<double>& x) {
  const double mu = mean(x);
  if (std::abs(mu) < 1e-12) throw Error(ErrorCode::ZeroStd, "channel mean is zero");
  for (double& v : x) v /= mu;
}

// a - (std(a) / std(b)) * b, with the ratio dropped when b is flat.
std::vector<double> tuned_difference(std::span<const double> a, std::span<const double> b,
                                     double sign) {
  const double sa = stddev(a), sb = stddev(b);
  const double alpha = sb > 1e-12 ? sa / sb : 0.0;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + sign * alpha * b[i];
  return out;
}

}  // namespace

PulseWaveform chrom_waveform(const RegionSeries& rgb, std::size_t region, const IirFilter* bandpass) {
  check_region(rgb, region);
  Rgb c = region_channels(rgb, region, 0, rgb.frames);
  divide_by_mean(c.r);
  divide_by_mean(c.g);
  divide_by_mean(c.b);
  std::vector<double> x(rgb.frames), y(rgb.frames);
  for (std::size_t t = 0; t < rgb.frames; ++t) {
    x[t] = 3.0 * c.r[t] - 2.0 * c.g[t];
    y[t] = 1.5 * c.r[t] + c.g[t] - 1.5 * c.b[t];
  }
  if (bandpass && rgb.frames > 3 * bandpass->sections.size()) {
    const std::size_t pad = 3 * bandpass->sections.size();
    x = filtfilt(*bandpass, x, pad);
    y = filtfilt(*bandpass, y, pad);
  }
  PulseWaveform out{tuned_difference(x, y, -1.0), rgb.fs};
  const double mu = mean(out.samples);
  for (double& v : out.samples) v -= mu;
  return out;
}

PulseWaveform pos_waveform(const RegionSeries& rgb, std::size_t region) {
  check_region(rgb, region);
  const std::size_t len =
      std::min(rgb.frames, std::max<std::size_t>(2, std::size_t(std::lround(kPosWindowSeconds * rgb.fs))));
  PulseWaveform out{std::vector<double>(rgb.frames, 0.0), rgb.fs};
  for (std::size_t m = 0; m + len <= rgb.frames; ++m) {
    Rgb c = region_channels(rgb, region, m, len);
    divide_by_mean(c.r);
    divide_by_mean(c.g);
    divide_by_mean(c.b);
    std::vector<double> s1(len), s2(len);
    for (std::size_t t = 0; t < len; ++t) {
      s1[t] = c.g[t] - c.b[t];
      s2[t] = -2.0 * c.r[t] + c.g[t] + c.b[t];
    }
    const auto h = tuned_difference(s1, s2, 1.0);
    const double mu = mean(h);
    for (std::size_t t = 0; t < len; ++t) out.samples[m + t] += h[t] - mu;
  }
  return out;
}

HrEstimate aggregate_region_hr(std::span<const PulseWaveform> regions,
                               std::span<const std::uint8_t> excluded, HrBand band) {
  HrEstimate total;
  const PulseWaveform* first = nullptr;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (r < excluded.size() && excluded[r]) continue;
    const auto& w = regions[r];
    if (!first) {
      first = &w;
    } else if (w.fs != first->fs) {
      throw Error(ErrorCode::MismatchedRates, "regions sampled at different rates");
    } else if (w.samples.size() != first->samples.size()) {
      throw Error(ErrorCode::ShapeMismatch, "regions differ in length");
    }
    HrEstimate s = power_spectrum(w, band);
    if (total.power.empty()) {
      total = std::move(s);
    } else {
      for (std::size_t k = 0; k < total.power.size(); ++k) total.power[k] += s.power[k];
    }
  }
  if (!first) throw Error(ErrorCode::AllRegionsExcluded, "every region was excluded");
  if (total.power.empty()) throw Error(ErrorCode::NoPowerInBand, "band holds no spectral bins");
  const auto best = std::max_element(total.power.begin(), total.power.end());
  if (!(*best >= 1e-20)) throw Error(ErrorCode::NoPowerInBand, "no power in the heart-rate band");
  total.peak_power = *best;
  total.bpm = 60.0 * total.freqs_hz[static_cast<std::size_t>(best - total.power.begin())];
  return total;
}

HrEstimate baseline_hr(const RegionSeries& rgb, BaselineMethod method, const IirFilter* bandpass,
                       HrBand band) {
  std::vector<PulseWaveform> waves(rgb.regions);
  std::vector<std::uint8_t> excluded(rgb.regions, 0);
  for (std::size_t r = 0; r < rgb.regions; ++r) {
    try {
      waves[r] = method == BaselineMethod::Chrom ? chrom_waveform(rgb, r, bandpass) : pos_waveform(rgb, r);
      if (method == BaselineMethod::Pos && bandpass && rgb.frames > 3 * bandpass->sections.size()) {
        waves[r].samples = filtfilt(*bandpass, waves[r].samples, 3 * bandpass->sections.size());
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SentinelInWindow && e.code() != ErrorCode::ZeroStd) throw;
      excluded[r] = 1;
    }
  }
  return aggregate_region_hr(waves, excluded, band);
}

}  // namespace ippg
