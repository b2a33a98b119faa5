#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ippg {

inline constexpr std::size_t kRegionCount = 48;
inline constexpr double kDefaultSentinel = -10.0;

/// T x regions x C intensity samples. Occluded (t, region) cells hold
/// `sentinel_value` in every channel and are flagged in `sentinel_mask`.
struct RegionSeries {
  std::size_t frames = 0;
  std::size_t regions = kRegionCount;
  std::size_t channels = 1;
  double fs = 0.0;
  double sentinel_value = kDefaultSentinel;
  std::vector<double> values;          // [t][r][c]
  std::vector<std::uint8_t> sentinel_mask;  // [t][r]

  RegionSeries() = default;
  RegionSeries(std::size_t t, std::size_t r, std::size_t c, double fs_hz,
               double sentinel = kDefaultSentinel)
      : frames(t), regions(r), channels(c), fs(fs_hz), sentinel_value(sentinel),
        values(t * r * c, 0.0), sentinel_mask(t * r, 0) {}

  /// Number of independent 1-D signals (region, channel pairs).
  std::size_t signal_count() const { return regions * channels; }

  double& at(std::size_t t, std::size_t r, std::size_t c = 0) {
    return values[(t * regions + r) * channels + c];
  }
  double at(std::size_t t, std::size_t r, std::size_t c = 0) const {
    return values[(t * regions + r) * channels + c];
  }
  /// Signal index i = r * channels + c.
  double& signal(std::size_t t, std::size_t i) { return values[t * regions * channels + i]; }
  double signal(std::size_t t, std::size_t i) const { return values[t * regions * channels + i]; }

  bool is_sentinel(std::size_t t, std::size_t r) const {
    return sentinel_mask[t * regions + r] != 0;
  }
  void set_sentinel(std::size_t t, std::size_t r) {
    sentinel_mask[t * regions + r] = 1;
    for (std::size_t c = 0; c < channels; ++c) at(t, r, c) = sentinel_value;
  }

  std::size_t sentinel_count() const;
  /// True when mask and values agree and all other entries are finite.
  bool consistent() const;
};

}  // namespace ippg
