#include "ippg/landmarks.hpp"

#include <algorithm>
#include <cmath>

#include "ippg/error.hpp"

namespace ippg {

namespace {

using namespace augmented_layout;

// Cheek rows run from a jawline landmark to an inner landmark (eye, nose,
// mouth); each row contributes points at t = 0.25, 0.5, 0.75. The image-right
// cheek mirrors the image-left one.
constexpr std::array<std::pair<std::uint8_t, std::uint8_t>, kCheekRows> kLeftCheekRows{{
    {0, 36}, {1, 41}, {2, 40}, {3, 31}, {3, 48}, {4, 48}, {5, 59}, {6, 58},
}};
constexpr std::array<std::pair<std::uint8_t, std::uint8_t>, kCheekRows> kRightCheekRows{{
    {16, 45}, {15, 46}, {14, 47}, {13, 35}, {13, 54}, {12, 54}, {11, 55}, {10, 56},
}};
constexpr std::array<double, kCheekColumns> kCheekFractions{0.25, 0.5, 0.75};

// Chin columns run from the lower lip down to the jawline.
constexpr std::array<std::pair<std::uint8_t, std::uint8_t>, 3> kChinColumns{{
    {59, 6}, {57, 8}, {55, 10},
}};
constexpr std::array<double, 3> kChinFractions{0.25, 0.5, 0.75};

constexpr std::array<InterpolationRule, kForeheadRow1Begin - kLeftCheekBegin> build_table() {
  std::array<InterpolationRule, kForeheadRow1Begin - kLeftCheekBegin> table{};
  std::size_t k = 0;
  for (const auto& rows : {kLeftCheekRows, kRightCheekRows}) {
    for (const auto& [jaw, inner] : rows) {
      for (double t : kCheekFractions) table[k++] = {jaw, inner, t};
    }
  }
  for (const auto& [lip, jaw] : kChinColumns) {
    for (double t : kChinFractions) table[k++] = {lip, jaw, t};
  }
  return table;
}

constexpr auto kTable = build_table();

struct BrowSide {
  std::uint8_t first_brow;  // five consecutive brow landmarks
  std::uint8_t inner_eye_corner;
  std::uint8_t mouth_corner;
};
constexpr std::array<BrowSide, 2> kBrowSides{{{17, 39, 48}, {22, 42, 54}}};

// Principal direction of a 2D point cloud (total least squares line).
Vec2 principal_direction(const std::vector<Vec2>& pts) {
  Vec2 mean{};
  for (const auto& p : pts) mean = mean + p;
  mean = (1.0 / static_cast<double>(pts.size())) * mean;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pts) {
    const Vec2 d = p - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  return {std::cos(theta), std::sin(theta)};
}

}  // namespace

std::span<const InterpolationRule> interpolation_table() { return kTable; }

AugmentedLandmarks augment_landmarks(const LandmarkFrame& frame,
                                     std::vector<AugmentationWarning>* warnings) {
  AugmentedLandmarks out;
  for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
    out.points[i] = frame.points[i];
    out.visible[i] = frame.visible[i];
    out.provenance[i] = {static_cast<std::uint8_t>(i)};
  }

  for (std::size_t k = 0; k < kTable.size(); ++k) {
    const auto& rule = kTable[k];
    const std::size_t idx = kLeftCheekBegin + k;
    out.points[idx] = (1.0 - rule.t) * frame.points[rule.from] + rule.t * frame.points[rule.to];
    out.visible[idx] = frame.visible[rule.from] && frame.visible[rule.to];
    out.provenance[idx] = {rule.from, rule.to};
  }

  Vec2 mouth_centroid{};
  for (std::size_t i = 48; i < 60; ++i) mouth_centroid = mouth_centroid + frame.points[i];
  mouth_centroid = (1.0 / 12.0) * mouth_centroid;

  for (std::size_t side = 0; side < kBrowSides.size(); ++side) {
    const BrowSide& s = kBrowSides[side];
    std::vector<std::uint8_t> provenance;
    std::vector<Vec2> fit_points;
    bool all_visible = frame.visible[s.inner_eye_corner] && frame.visible[s.mouth_corner];
    Vec2 brow_centroid{};
    for (std::uint8_t b = s.first_brow; b < s.first_brow + 5; ++b) {
      provenance.push_back(b);
      brow_centroid = brow_centroid + frame.points[b];
      if (frame.visible[b]) {
        fit_points.push_back(frame.points[b]);
      } else {
        all_visible = false;
      }
    }
    brow_centroid = 0.2 * brow_centroid;
    provenance.push_back(s.inner_eye_corner);
    provenance.push_back(s.mouth_corner);

    const bool can_fit = fit_points.size() >= 2;
    if (!can_fit && warnings) {
      warnings->push_back({AugmentationWarning::Kind::FewerThanTwoVisibleEyebrowPoints,
                           static_cast<int>(side)});
    }

    Vec2 normal{};
    double offset = 0.0;
    if (can_fit) {
      const Vec2 along = principal_direction(fit_points);
      normal = {-along.y, along.x};
      if (dot(normal, brow_centroid - mouth_centroid) < 0.0) normal = -1.0 * normal;
      const Vec2 eye_to_mouth = frame.points[s.mouth_corner] - frame.points[s.inner_eye_corner];
      offset = std::sqrt(dot(eye_to_mouth, eye_to_mouth)) / 5.0;
    }

    for (std::size_t j = 0; j < 5; ++j) {
      const std::size_t brow = s.first_brow + j;
      const std::size_t col = side * 5 + j;
      for (std::size_t row = 0; row < 2; ++row) {
        const std::size_t idx = (row == 0 ? kForeheadRow1Begin : kForeheadRow2Begin) + col;
        out.points[idx] = can_fit
                              ? frame.points[brow] + (static_cast<double>(row + 1) * offset) * normal
                              : frame.points[brow];
        out.visible[idx] = can_fit && all_visible;
        out.provenance[idx] = provenance;
      }
    }
  }
  return out;
}

double motion_score(std::span<const LandmarkFrame> frames) {
  if (frames.size() < 2) {
    throw Error(ErrorCode::TooFewFrames, "motion score needs at least 2 frames, got " +
                                             std::to_string(frames.size()));
  }
  const double n = static_cast<double>(frames.size());
  double total = 0.0;
  for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
    // Offsets from the first frame keep a static landmark at exactly zero.
    const Vec2 ref = frames.front().points[i];
    double mx = 0, my = 0;
    for (const auto& f : frames) {
      mx += f.points[i].x - ref.x;
      my += f.points[i].y - ref.y;
    }
    mx /= n;
    my /= n;
    double vx = 0, vy = 0;
    for (const auto& f : frames) {
      const double dx = f.points[i].x - ref.x - mx, dy = f.points[i].y - ref.y - my;
      vx += dx * dx;
      vy += dy * dy;
    }
    total += std::sqrt(vx / n + vy / n);
  }
  return total / static_cast<double>(kDetectedLandmarks);
}

std::vector<LandmarkFrame> smooth_landmarks(std::span<const LandmarkFrame> frames,
                                            std::size_t window) {
  std::vector<LandmarkFrame> out(frames.begin(), frames.end());
  if (window <= 1 || frames.empty()) return out;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(frames.size());
  const std::ptrdiff_t before = static_cast<std::ptrdiff_t>((window - 1) / 2);
  const std::ptrdiff_t after = static_cast<std::ptrdiff_t>(window - 1) - before;
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - before);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, t + after);
    const double count = static_cast<double>(hi - lo + 1);
    for (std::size_t i = 0; i < kDetectedLandmarks; ++i) {
      Vec2 acc{};
      for (std::ptrdiff_t u = lo; u <= hi; ++u) acc = acc + frames[u].points[i];
      out[t].points[i] = (1.0 / count) * acc;
    }
  }
  return out;
}

}  // namespace ippg
