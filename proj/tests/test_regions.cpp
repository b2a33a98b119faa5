#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "ippg/error.hpp"
#include "ippg/regions.hpp"

using namespace ippg;
using ippg::testing::frontal_face;

namespace {

constexpr int kW = 240, kH = 260;
const Vec2 kCenter{120.0, 130.0};
constexpr double kScale = 80.0;

// Brute-force even-odd test on every pixel center of the image.
bool inside(std::span<const Vec2> poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

std::vector<Pixel> brute_force(std::span<const Vec2> poly, int w, int h) {
  std::vector<Pixel> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (inside(poly, x + 0.5, y + 0.5)) out.push_back({x, y});
  return out;
}

std::vector<Vec2> polygon(const RegionMap& map, const AugmentedLandmarks& a, std::size_t r) {
  std::vector<Vec2> v;
  for (auto idx : map.regions[r]) v.push_back(a.points[idx]);
  return v;
}

bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); };
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

Frame solid(double r, double g, double b) {
  Frame f(kW, kH, 3);
  for (int y = 0; y < kH; ++y)
    for (int x = 0; x < kW; ++x) {
      f.at(x, y, 0) = float(r);
      f.at(x, y, 1) = float(g);
      f.at(x, y, 2) = float(b);
    }
  return f;
}

std::vector<AugmentedLandmarks> face_track(std::size_t n, const LandmarkFrame& lm) {
  return std::vector<AugmentedLandmarks>(n, augment_landmarks(lm));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ippg::Error");
  return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("region map: 48 polygons over valid indices, positive area, simple") {
  const RegionMap map = build_region_map();
  CHECK(map.regions.size() == 48);
  const auto a = augment_landmarks(frontal_face(kScale, kCenter));
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    const auto& reg = map.regions[r];
    CHECK(reg.size() >= 3);
    for (auto idx : reg) CHECK(idx < kAugmentedLandmarks);
    const auto v = polygon(map, a, r);
    CHECK(std::abs(polygon_area(v)) > 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 2; j < v.size(); ++j) {
        if (i == 0 && j == v.size() - 1) continue;
        CHECK_FALSE(segments_cross(v[i], v[(i + 1) % v.size()], v[j], v[(j + 1) % v.size()]));
      }
  }
}

TEST_CASE("region zones: 20 forehead, 12 per cheek, 4 chin") {
  namespace rl = region_layout;
  CHECK(rl::kLeftCheekBegin - rl::kForeheadBegin == 20);
  CHECK(rl::kRightCheekBegin - rl::kLeftCheekBegin == 12);
  CHECK(rl::kChinBegin - rl::kRightCheekBegin == 12);
  CHECK(kRegionCount - rl::kChinBegin == 4);
  const RegionMap map = build_region_map();
  const auto a = augment_landmarks(frontal_face(kScale, kCenter));
  // Forehead regions lie above the brows' lowest point; chin regions below the mouth.
  double brow_low = -1e9;
  for (std::size_t b = 17; b < 27; ++b) brow_low = std::max(brow_low, a.points[b].y);
  for (std::size_t r = rl::kForeheadBegin; r < rl::kLeftCheekBegin; ++r) {
    double cy = 0;
    for (auto idx : map.regions[r]) cy += a.points[idx].y;
    CHECK(cy / double(map.regions[r].size()) < brow_low + 0.2 * kScale);
  }
  for (std::size_t r = rl::kChinBegin; r < kRegionCount; ++r) {
    double cy = 0;
    for (auto idx : map.regions[r]) cy += a.points[idx].y;
    CHECK(cy / double(map.regions[r].size()) > a.points[57].y);
  }
}

TEST_CASE("rasterize: square, outside, triangle, degenerate, clipped") {
  const std::vector<Vec2> square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  CHECK(rasterize_polygon(square, 20, 20).size() == 100);

  const std::vector<Vec2> outside{{30, 30}, {40, 30}, {40, 40}, {30, 40}};
  CHECK(rasterize_polygon(outside, 20, 20).empty());

  const std::vector<Vec2> tri{{0, 0}, {4, 0}, {0, 4}};
  auto got = rasterize_polygon(tri, 20, 20);
  auto want = brute_force(tri, 20, 20);
  auto by_pos = [](Pixel a, Pixel b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); };
  std::sort(got.begin(), got.end(), by_pos);
  std::sort(want.begin(), want.end(), by_pos);
  CHECK(got == want);
  CHECK(got.size() == 6);

  const std::vector<Vec2> sliver{{0, 0}, {5, 0}, {5, 0.1}};
  CHECK(rasterize_polygon(sliver, 20, 20).empty());

  const std::vector<Vec2> straddle{{-5, -5}, {5, -5}, {5, 5}, {-5, 5}};
  CHECK(rasterize_polygon(straddle, 20, 20).size() == 25);
}

TEST_CASE("rasterize matches brute force on random polygons including concave ones") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 36.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Vec2> poly;
    const int n = 3 + trial % 5;
    // Star-shaped about the center keeps the polygon simple but often concave.
    for (int k = 0; k < n; ++k) {
      const double ang = 2.0 * ippg::testing::kPi * k / n;
      const double rad = 3.0 + std::abs(u(rng)) * 0.5;
      poly.push_back({16 + rad * std::cos(ang), 16 + rad * std::sin(ang)});
    }
    auto got = rasterize_polygon(poly, 32, 32);
    auto want = std::abs(polygon_area(poly)) < 1.0 ? std::vector<Pixel>{} : brute_force(poly, 32, 32);
    auto by_pos = [](Pixel a, Pixel b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); };
    std::sort(got.begin(), got.end(), by_pos);
    std::sort(want.begin(), want.end(), by_pos);
    CHECK(got == want);
  }
}

TEST_CASE("channel modes parse and validate") {
  CHECK(ChannelMode::parse("red").indices() == std::vector<int>{0});
  CHECK(ChannelMode::parse("green").indices() == std::vector<int>{1});
  CHECK(ChannelMode::parse("blue").indices() == std::vector<int>{2});
  CHECK(ChannelMode::parse("rog").kind() == ChannelMode::Kind::RedOverGreen);
  CHECK(ChannelMode::parse("rgb").output_channels() == 3);
  CHECK(code_of([] { ChannelMode::parse("hsv"); }) == ErrorCode::InvalidChannelMode);
  CHECK(code_of([] { ChannelMode::single(3).validate(3); }) == ErrorCode::InvalidChannelMode);
  CHECK_NOTHROW(ChannelMode::single(2).validate(3));
  for (const char* name : {"red", "green", "blue", "rog", "rgb"}) CHECK(ChannelMode::parse(name).name() == name);
}

TEST_CASE("uniform R=120 G=60 frame gives R/G = 2 everywhere") {
  MemoryFrameSource src({solid(120, 60, 30), solid(120, 60, 30)}, 25.0);
  const auto lm = face_track(2, frontal_face(kScale, kCenter));
  const auto res = extract_region_series(src, lm, build_region_map(), ChannelMode::red_over_green());
  CHECK(res.series.frames == 2);
  CHECK(res.series.regions == 48);
  CHECK(res.series.sentinel_count() == 0);
  for (double v : res.series.values) CHECK(v == 2.0);
  CHECK(res.series.consistent());
}

TEST_CASE("an invisible brow landmark puts sentinels in the forehead regions using it") {
  LandmarkFrame hidden = frontal_face(kScale, kCenter);
  hidden.visible[19] = false;
  std::vector<AugmentedLandmarks> lm{augment_landmarks(frontal_face(kScale, kCenter)), augment_landmarks(hidden)};
  MemoryFrameSource src({solid(120, 60, 30), solid(120, 60, 30)}, 25.0);
  const RegionMap map = build_region_map();
  const auto res = extract_region_series(src, lm, map, ChannelMode::red_over_green());
  const auto& s = res.series;
  std::size_t forehead_hits = 0;
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    CHECK_FALSE(s.is_sentinel(0, r));
    bool uses_hidden = false;
    for (auto idx : map.regions[r]) uses_hidden = uses_hidden || !lm[1].visible[idx];
    CHECK(s.is_sentinel(1, r) == uses_hidden);
    if (uses_hidden) {
      CHECK(s.at(1, r) == -10.0);
      if (r < region_layout::kLeftCheekBegin) ++forehead_hits;
    }
  }
  CHECK(forehead_hits > 0);
  CHECK(s.consistent());
}

TEST_CASE("single-channel green mean equals a brute-force pixel average") {
  Frame f(kW, kH, 3);
  for (int y = 0; y < kH; ++y)
    for (int x = 0; x < kW; ++x) {
      f.at(x, y, 0) = 50.0f;
      f.at(x, y, 1) = float(10.0 + 0.5 * x + 0.25 * y);
      f.at(x, y, 2) = 20.0f;
    }
  MemoryFrameSource src({f}, 25.0);
  const auto lm = face_track(1, frontal_face(kScale, kCenter));
  const RegionMap map = build_region_map();
  const auto res = extract_region_series(src, lm, map, ChannelMode::single(1));
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    const auto v = polygon(map, lm[0], r);
    const auto px = brute_force(v, kW, kH);
    REQUIRE_FALSE(px.empty());
    double sum = 0;
    for (auto p : px) sum += f.at(p.x, p.y, 1);
    CHECK(res.series.at(0, r) == doctest::Approx(sum / double(px.size())).epsilon(1e-12));
  }
}

TEST_CASE("intensity scaling scales single channel and leaves R/G unchanged") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(20.0f, 200.0f);
  Frame f(kW, kH, 3), g(kW, kH, 3);
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    f.data[i] = u(rng);
    g.data[i] = 4.0f * f.data[i];
  }
  const auto lm = face_track(1, frontal_face(kScale, kCenter));
  const RegionMap map = build_region_map();
  MemoryFrameSource a({f}, 25.0), b({g}, 25.0);
  const auto ra = extract_region_series(a, lm, map, ChannelMode::single(0)).series;
  const auto rb = extract_region_series(b, lm, map, ChannelMode::single(0)).series;
  const auto qa = extract_region_series(a, lm, map, ChannelMode::red_over_green()).series;
  const auto qb = extract_region_series(b, lm, map, ChannelMode::red_over_green()).series;
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    CHECK(rb.at(0, r) == doctest::Approx(4.0 * ra.at(0, r)).epsilon(1e-12));
    CHECK(qb.at(0, r) == doctest::Approx(qa.at(0, r)).epsilon(1e-12));
  }
}

TEST_CASE("R/G on constant-coloured regions agrees with the per-pixel ratio definition") {
  const auto lm = face_track(1, frontal_face(kScale, kCenter));
  const RegionMap map = build_region_map();
  MemoryFrameSource src({solid(90, 72, 40)}, 25.0);
  const auto s = extract_region_series(src, lm, map, ChannelMode::red_over_green()).series;
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    // Ratio of means and mean of ratios coincide on a constant region.
    const double per_pixel = double(90.0f) / double(72.0f);
    CHECK(s.at(0, r) == doctest::Approx(per_pixel).epsilon(1e-12));
  }
}

TEST_CASE("stacked mode emits one value per listed channel") {
  const auto lm = face_track(1, frontal_face(kScale, kCenter));
  MemoryFrameSource src({solid(120, 60, 30)}, 25.0);
  const auto s = extract_region_series(src, lm, build_region_map(), ChannelMode::parse("rgb")).series;
  CHECK(s.channels == 3);
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    CHECK(s.at(0, r, 0) == 120.0);
    CHECK(s.at(0, r, 1) == 60.0);
    CHECK(s.at(0, r, 2) == 30.0);
  }
}

TEST_CASE("zero green mean and collapsed regions become sentinels with warnings") {
  const auto lm = face_track(1, frontal_face(kScale, kCenter));
  MemoryFrameSource src({solid(120, 0, 30)}, 25.0);
  const auto res = extract_region_series(src, lm, build_region_map(), ChannelMode::red_over_green());
  CHECK(res.series.sentinel_count() == 48);
  CHECK(res.warnings.size() == 48);
  CHECK(res.warnings[0].kind == ExtractionWarning::Kind::ZeroGreenMean);

  LandmarkFrame tiny = frontal_face(0.5, kCenter);
  const auto lt = face_track(1, tiny);
  MemoryFrameSource src2({solid(120, 60, 30)}, 25.0);
  const auto res2 = extract_region_series(src2, lt, build_region_map(), ChannelMode::red_over_green());
  CHECK(res2.series.sentinel_count() == 48);
  CHECK(std::all_of(res2.warnings.begin(), res2.warnings.end(),
                    [](const ExtractionWarning& w) { return w.kind == ExtractionWarning::Kind::EmptyRegion; }));
}

TEST_CASE("frame and landmark counts must agree; custom sentinel honoured") {
  const auto lm = face_track(1, frontal_face(kScale, kCenter));
  MemoryFrameSource src({solid(1, 1, 1), solid(1, 1, 1)}, 25.0);
  CHECK(code_of([&] { extract_region_series(src, lm, build_region_map(), ChannelMode::single(0)); }) ==
        ErrorCode::FrameLandmarkCountMismatch);

  LandmarkFrame hidden = frontal_face(kScale, kCenter);
  hidden.visible[8] = false;
  const std::vector<AugmentedLandmarks> lh{augment_landmarks(hidden)};
  MemoryFrameSource one({solid(120, 60, 30)}, 25.0);
  const auto s = extract_region_series(one, lh, build_region_map(), ChannelMode::single(1), -7.5).series;
  CHECK(s.sentinel_value == -7.5);
  CHECK(s.sentinel_count() > 0);
  for (std::size_t r = 0; r < kRegionCount; ++r)
    if (s.is_sentinel(0, r)) CHECK(s.at(0, r) == -7.5);
  CHECK(s.consistent());
}
