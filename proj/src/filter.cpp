#include "ippg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ippg/error.hpp"

namespace ippg {

namespace {

using cplx = std::complex<double>;

SecondOrderSection section_from_poles(cplx z1, cplx z2) {
  // Zeros at z = +1 and z = -1.
  return {1.0, 0.0, -1.0, -(z1 + z2).real(), (z1 * z2).real()};
}

cplx section_response(const SecondOrderSection& s, cplx z) {
  const cplx zi = 1.0 / z;
  return (s.b0 + zi * (s.b1 + zi * s.b2)) / (1.0 + zi * (s.a1 + zi * s.a2));
}

// Transposed direct form II state after a long constant input.
std::pair<double, double> steady_state(const SecondOrderSection& s, double input) {
  const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  const double y = gain * input;
  const double s2 = s.b2 * input - s.a2 * y;
  const double s1 = s.b1 * input - s.a1 * y + s2;
  return {s1, s2};
}

}  // namespace

cplx IirFilter::response(double freq_hz, double fs) const {
  const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / fs);
  cplx h = 1.0;
  for (const auto& s : sections) h *= section_response(s, z);
  return h;
}

std::vector<double> IirFilter::pole_radii() const {
  std::vector<double> radii;
  for (const auto& s : sections) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    const cplx r1 = (-s.a1 + disc) / 2.0;
    const cplx r2 = (-s.a1 - disc) / 2.0;
    radii.push_back(std::max(std::abs(r1), std::abs(r2)));
  }
  return radii;
}

bool IirFilter::stable() const {
  const auto radii = pole_radii();
  return std::all_of(radii.begin(), radii.end(), [](double r) { return r < 1.0; });
}

IirFilter design_bandpass(const BandpassSpec& spec) {
  if (!(spec.order >= 1 && spec.low_hz > 0 && spec.low_hz < spec.high_hz &&
        spec.high_hz < spec.fs / 2)) {
    throw Error(ErrorCode::InvalidBand, "need 0 < low < high < fs/2 and order >= 1");
  }
  const double pi = std::numbers::pi;
  const double two_fs = 2.0 * spec.fs;
  const double w_lo = two_fs * std::tan(pi * spec.low_hz / spec.fs);
  const double w_hi = two_fs * std::tan(pi * spec.high_hz / spec.fs);
  const double bw = w_hi - w_lo;
  const double w0_sq = w_lo * w_hi;
  const int n = spec.order;

  auto to_z = [two_fs](cplx s) { return (two_fs + s) / (two_fs - s); };
  // Each prototype pole p maps to the two roots of s^2 - p*bw*s + w0^2.
  auto bandpass_poles = [&](cplx p) {
    const cplx half = p * bw / 2.0;
    const cplx disc = std::sqrt(half * half - w0_sq);
    return std::pair{to_z(half + disc), to_z(half - disc)};
  };

  IirFilter filt;
  for (int k = 0; k < n / 2; ++k) {
    const cplx p = std::polar(1.0, pi * (2.0 * k + n + 1) / (2.0 * n));
    const auto [z1, z2] = bandpass_poles(p);
    filt.sections.push_back(section_from_poles(z1, std::conj(z1)));
    filt.sections.push_back(section_from_poles(z2, std::conj(z2)));
  }
  if (n % 2 == 1) {
    const auto [z1, z2] = bandpass_poles(cplx(-1.0, 0.0));
    filt.sections.push_back(section_from_poles(z1, z2));
  }

  const double center = spec.fs / pi * std::atan(std::sqrt(w0_sq) / two_fs);
  const double gain = 1.0 / std::abs(filt.response(center, spec.fs));
  auto& first = filt.sections.front();
  first.b0 *= gain;
  first.b1 *= gain;
  first.b2 *= gain;
  return filt;
}

std::vector<double> sosfilt(const IirFilter& filt, std::span<const double> x,
                            double zero_state_scale) {
  std::vector<double> y(x.begin(), x.end());
  double level = zero_state_scale;
  for (const auto& s : filt.sections) {
    auto [s1, s2] = steady_state(s, level);
    level *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> filtfilt(const IirFilter& filt, std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  pad = std::min(pad, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  auto fwd = sosfilt(filt, ext, ext.front());
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = sosfilt(filt, fwd, fwd.front());
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

RegionSeries filter_series(const RegionSeries& series, const IirFilter& filt,
                           std::vector<FilterWarning>* warnings) {
  const std::size_t order = filt.sections.size();
  if (series.frames <= 3 * order) {
    throw Error(ErrorCode::SeriesTooShort, "filtering needs more than " +
                                               std::to_string(3 * order) + " samples");
  }
  RegionSeries out = series;
  std::vector<double> run;
  for (std::size_t r = 0; r < series.regions; ++r) {
    std::size_t t = 0;
    while (t < series.frames) {
      if (series.is_sentinel(t, r)) {
        ++t;
        continue;
      }
      const std::size_t start = t;
      while (t < series.frames && !series.is_sentinel(t, r)) ++t;
      const std::size_t len = t - start;
      for (std::size_t c = 0; c < series.channels; ++c) {
        if (len < 4) {
          if (warnings) warnings->push_back({r * series.channels + c, start, len});
          continue;
        }
        run.resize(len);
        for (std::size_t k = 0; k < len; ++k) run[k] = series.at(start + k, r, c);
        const auto filtered = filtfilt(filt, run, std::min(3 * order, len - 1));
        for (std::size_t k = 0; k < len; ++k) out.at(start + k, r, c) = filtered[k];
      }
    }
  }
  return out;
}

}  // namespace ippg
