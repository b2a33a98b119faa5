#include "ippg/regions.hpp"

#include <algorithm>
#include <cmath>

#include "ippg/error.hpp"

namespace ippg {

std::size_t RegionSeries::sentinel_count() const {
  return static_cast<std::size_t>(std::count(sentinel_mask.begin(), sentinel_mask.end(), 1));
}

bool RegionSeries::consistent() const {
  if (values.size() != frames * regions * channels || sentinel_mask.size() != frames * regions) {
    return false;
  }
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t r = 0; r < regions; ++r) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = at(t, r, c);
        if (is_sentinel(t, r) ? v != sentinel_value : (!std::isfinite(v) || v == sentinel_value)) {
          return false;
        }
      }
    }
  }
  return true;
}

RegionMap build_region_map() {
  using namespace augmented_layout;
  RegionMap map;
  std::size_t k = 0;
  auto add = [&](std::initializer_list<std::size_t> idx) {
    auto& poly = map.regions[k++];
    for (auto i : idx) poly.push_back(static_cast<std::uint8_t>(i));
  };

  // Forehead: two bands of nine quads over the ten brow columns, plus the
  // glabella on either side of the nose bridge.
  auto row1 = [](std::size_t brow) { return kForeheadRow1Begin + (brow - 17); };
  auto row2 = [](std::size_t brow) { return kForeheadRow2Begin + (brow - 17); };
  for (std::size_t b = 17; b < 26; ++b) add({b, b + 1, row1(b + 1), row1(b)});
  for (std::size_t b = 17; b < 26; ++b) add({row1(b), row1(b + 1), row2(b + 1), row2(b)});
  add({20, 21, 27, 39});
  add({22, 23, 42, 27});

  // Cheeks: row bands 0-1, 1-2, 2-3 (upper) and 4-5, 5-6, 6-7 (lower) across
  // the two spans between the interpolated columns.
  for (std::size_t begin : {kLeftCheekBegin, kRightCheekBegin}) {
    auto p = [begin](std::size_t row, std::size_t col) { return begin + kCheekColumns * row + col; };
    for (std::size_t row : {0, 1, 2, 4, 5, 6}) {
      for (std::size_t col = 0; col < 2; ++col) {
        add({p(row, col), p(row, col + 1), p(row + 1, col + 1), p(row + 1, col)});
      }
    }
  }

  // Chin: 2 x 2 quads over the 3 x 3 interpolated grid.
  auto c = [](std::size_t column, std::size_t frac) { return kChinBegin + 3 * column + frac; };
  for (std::size_t column = 0; column < 2; ++column) {
    for (std::size_t frac = 0; frac < 2; ++frac) {
      add({c(column, frac), c(column + 1, frac), c(column + 1, frac + 1), c(column, frac + 1)});
    }
  }
  return map;
}

double polygon_area(std::span<const Vec2> v) {
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return 0.5 * twice;
}

std::vector<Pixel> rasterize_polygon(std::span<const Vec2> vertices, int width, int height) {
  std::vector<Pixel> out;
  if (vertices.size() < 3 || width <= 0 || height <= 0) return out;
  if (std::abs(polygon_area(vertices)) < 1.0) return out;

  double ymin = vertices[0].y, ymax = vertices[0].y;
  for (const auto& p : vertices) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row_lo = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int row_hi = std::min(height - 1, static_cast<int>(std::ceil(ymax - 0.5)));

  std::vector<double> xs;
  for (int py = row_lo; py <= row_hi; ++py) {
    const double y = py + 0.5;
    xs.clear();
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
      const Vec2 a = vertices[j];
      const Vec2 b = vertices[i];
      if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    // Centers in [xs[2k], xs[2k+1]) have an odd number of crossings to their right.
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int px_lo = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int px_hi = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      for (int px = px_lo; px <= px_hi; ++px) out.push_back({px, py});
    }
  }
  return out;
}

ChannelMode ChannelMode::parse(std::string_view name) {
  if (name == "red") return single(0);
  if (name == "green") return single(1);
  if (name == "blue") return single(2);
  if (name == "rog") return red_over_green();
  if (name == "rgb") return stacked({0, 1, 2});
  throw Error(ErrorCode::InvalidChannelMode, "unknown channel mode '" + std::string(name) + "'");
}

void ChannelMode::validate(int frame_channels) const {
  for (int i : indices_) {
    if (i < 0 || i >= frame_channels) {
      throw Error(ErrorCode::InvalidChannelMode,
                  "channel " + std::to_string(i) + " not present in " +
                      std::to_string(frame_channels) + "-channel frames");
    }
  }
  if (indices_.empty()) throw Error(ErrorCode::InvalidChannelMode, "no channels selected");
}

std::string ChannelMode::name() const {
  switch (kind_) {
    case Kind::RedOverGreen: return "rog";
    case Kind::SingleChannel: {
      static constexpr const char* names[] = {"red", "green", "blue"};
      return indices_[0] < 3 ? names[indices_[0]] : "channel" + std::to_string(indices_[0]);
    }
    case Kind::Stacked: {
      std::string s = "stacked";
      for (int i : indices_) s += ":" + std::to_string(i);
      return indices_ == std::vector<int>{0, 1, 2} ? "rgb" : s;
    }
  }
  return "";
}

ExtractionResult extract_region_series(const FrameSource& frames,
                                       std::span<const AugmentedLandmarks> landmarks,
                                       const RegionMap& map, const ChannelMode& mode,
                                       double sentinel_value) {
  if (landmarks.size() != frames.frame_count()) {
    throw Error(ErrorCode::FrameLandmarkCountMismatch,
                std::to_string(frames.frame_count()) + " frames but " +
                    std::to_string(landmarks.size()) + " landmark records");
  }
  mode.validate(frames.channels());

  const std::size_t n_out = mode.output_channels();
  ExtractionResult result{RegionSeries(frames.frame_count(), kRegionCount, n_out, frames.fps(),
                                       sentinel_value),
                          {}};
  RegionSeries& series = result.series;
  const auto& idx = mode.indices();
  std::vector<Vec2> poly;
  std::vector<double> sums(idx.size());

  for (std::size_t t = 0; t < frames.frame_count(); ++t) {
    const Frame frame = frames.frame(t);
    const AugmentedLandmarks& lm = landmarks[t];
    for (std::size_t r = 0; r < kRegionCount; ++r) {
      const auto& region = map.regions[r];
      bool visible = true;
      poly.clear();
      for (auto v : region) {
        visible = visible && lm.visible[v];
        poly.push_back(lm.points[v]);
      }
      if (!visible) {
        series.set_sentinel(t, r);
        continue;
      }
      const auto pixels = rasterize_polygon(poly, frame.width, frame.height);
      if (pixels.empty()) {
        series.set_sentinel(t, r);
        result.warnings.push_back({ExtractionWarning::Kind::EmptyRegion, t, r});
        continue;
      }
      std::fill(sums.begin(), sums.end(), 0.0);
      for (const auto& px : pixels) {
        for (std::size_t k = 0; k < idx.size(); ++k) sums[k] += frame.at(px.x, px.y, idx[k]);
      }
      const double count = static_cast<double>(pixels.size());
      if (mode.kind() == ChannelMode::Kind::RedOverGreen) {
        const double green = sums[1] / count;
        if (std::abs(green) < 1e-12) {
          series.set_sentinel(t, r);
          result.warnings.push_back({ExtractionWarning::Kind::ZeroGreenMean, t, r});
          continue;
        }
        series.at(t, r) = (sums[0] / count) / green;
      } else {
        for (std::size_t k = 0; k < n_out; ++k) series.at(t, r, k) = sums[k] / count;
      }
    }
  }
  return result;
}

}  // namespace ippg
