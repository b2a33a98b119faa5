#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ippg/frame.hpp"
#include "ippg/landmarks.hpp"
#include "ippg/region_series.hpp"

namespace ippg {

/// 48 facial polygons over augmented-landmark indices.
struct RegionMap {
  std::array<std::vector<std::uint8_t>, kRegionCount> regions;
};

/// Region index ranges within the canonical map.
namespace region_layout {
inline constexpr std::size_t kForeheadBegin = 0;     // 20 regions
inline constexpr std::size_t kLeftCheekBegin = 20;   // 12 regions
inline constexpr std::size_t kRightCheekBegin = 32;  // 12 regions
inline constexpr std::size_t kChinBegin = 44;        // 4 regions
}  // namespace region_layout

RegionMap build_region_map();

struct Pixel {
  int x;
  int y;
  friend bool operator==(Pixel, Pixel) = default;
};

/// Pixels whose centers (x + 0.5, y + 0.5) fall inside the polygon under the
/// even-odd rule, clipped to the image. Polygons with area below one pixel
/// rasterize to nothing.
std::vector<Pixel> rasterize_polygon(std::span<const Vec2> vertices, int width, int height);

double polygon_area(std::span<const Vec2> vertices);

class ChannelMode {
 public:
  enum class Kind { SingleChannel, RedOverGreen, Stacked };

  static ChannelMode single(int channel) { return ChannelMode(Kind::SingleChannel, {channel}); }
  static ChannelMode red_over_green() { return ChannelMode(Kind::RedOverGreen, {0, 1}); }
  static ChannelMode stacked(std::vector<int> channels) {
    return ChannelMode(Kind::Stacked, std::move(channels));
  }
  /// red | green | blue | rog | rgb (case-sensitive). Throws InvalidChannelMode.
  static ChannelMode parse(std::string_view name);

  Kind kind() const { return kind_; }
  const std::vector<int>& indices() const { return indices_; }
  std::size_t output_channels() const { return kind_ == Kind::Stacked ? indices_.size() : 1; }
  /// Throws InvalidChannelMode when an index exceeds the frame's channel count.
  void validate(int frame_channels) const;
  std::string name() const;

 private:
  ChannelMode(Kind k, std::vector<int> idx) : kind_(k), indices_(std::move(idx)) {}
  Kind kind_;
  std::vector<int> indices_;
};

struct ExtractionWarning {
  enum class Kind { ZeroGreenMean, EmptyRegion } kind;
  std::size_t frame;
  std::size_t region;
};

struct ExtractionResult {
  RegionSeries series;
  std::vector<ExtractionWarning> warnings;
};

ExtractionResult extract_region_series(const FrameSource& frames,
                                       std::span<const AugmentedLandmarks> landmarks,
                                       const RegionMap& map, const ChannelMode& mode,
                                       double sentinel_value = kDefaultSentinel);

}  // namespace ippg
