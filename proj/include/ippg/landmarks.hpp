#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ippg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

inline constexpr std::size_t kDetectedLandmarks = 68;
inline constexpr std::size_t kAugmentedLandmarks = 145;

/// 68-point detector output for one frame (iBUG-300W index layout).
struct LandmarkFrame {
  std::size_t frame_index = 0;
  std::array<Vec2, kDetectedLandmarks> points{};
  std::array<bool, kDetectedLandmarks> visible{};
};

struct AugmentedLandmarks {
  std::array<Vec2, kAugmentedLandmarks> points{};
  std::array<bool, kAugmentedLandmarks> visible{};
  // Source landmark indices (into the 68) each point was built from.
  std::array<std::vector<std::uint8_t>, kAugmentedLandmarks> provenance{};
};

/// One linear interpolation entry: point = (1 - t) * from + t * to.
struct InterpolationRule {
  std::uint8_t from;
  std::uint8_t to;
  double t;
};

/// Landmark-index layout of the augmented set.
namespace augmented_layout {
inline constexpr std::size_t kLeftCheekBegin = 68;    // 24 points, image-left cheek
inline constexpr std::size_t kRightCheekBegin = 92;   // 24 points, image-right cheek
inline constexpr std::size_t kChinBegin = 116;        // 9 points
inline constexpr std::size_t kForeheadRow1Begin = 125;  // 10 points, one per brow landmark
inline constexpr std::size_t kForeheadRow2Begin = 135;  // 10 points
inline constexpr std::size_t kCheekRows = 8;
inline constexpr std::size_t kCheekColumns = 3;
}  // namespace augmented_layout

/// Interpolated cheek and chin points (indices 68..124), in order.
std::span<const InterpolationRule> interpolation_table();

/// Why a forehead point could not be extrapolated.
struct AugmentationWarning {
  enum class Kind { FewerThanTwoVisibleEyebrowPoints } kind;
  int side;  // 0 = image-left brow (17..21), 1 = image-right brow (22..26)
};

AugmentedLandmarks augment_landmarks(const LandmarkFrame& frame,
                                     std::vector<AugmentationWarning>* warnings = nullptr);

/// Mean over the 68 landmarks of sqrt(var_x + var_y), population variance
/// across frames. Throws TooFewFrames for fewer than two frames.
double motion_score(std::span<const LandmarkFrame> frames);

/// Centered moving average of landmark coordinates over `window` frames,
/// truncated at the sequence ends. Visibility flags are left unchanged.
std::vector<LandmarkFrame> smooth_landmarks(std::span<const LandmarkFrame> frames,
                                            std::size_t window);

}  // namespace ippg
