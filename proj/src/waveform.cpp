#include "ippg/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ippg/error.hpp"

namespace ippg {

std::vector<double> sample_linear(std::span<const double> src, double start, double step,
                                  std::size_t count) {
  std::vector<double> out(count);
  if (src.empty()) return out;
  const double last = static_cast<double>(src.size() - 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = std::clamp(start + step * static_cast<double>(k), 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    out[k] = lo + 1 < src.size() ? (1.0 - frac) * src[lo] + frac * src[lo + 1] : src[lo];
  }
  return out;
}

PulseWaveform resample_ground_truth(const PulseWaveform& wave, double to_hz) {
  if (wave.samples.size() < 2 || wave.fs <= 0 || to_hz <= 0) {
    throw Error(ErrorCode::EmptyWave, "cannot resample a waveform of " +
                                          std::to_string(wave.samples.size()) + " samples");
  }
  if (to_hz == wave.fs) return wave;
  const double duration = static_cast<double>(wave.samples.size()) / wave.fs;
  const auto count = static_cast<std::size_t>(std::llround(duration * to_hz));
  return {sample_linear(wave.samples, 0.0, wave.fs / to_hz, count), to_hz};
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> standardize(std::span<const double> x) {
  const double m = mean(x);
  const double s = stddev(x);
  std::vector<double> out(x.size(), 0.0);
  if (s <= 1e-300) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / s;
  return out;
}

}  // namespace ippg
