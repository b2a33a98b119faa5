#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ippg {

struct VideoEntry {
  std::string video_id;
  std::string subject_id;
  std::string dataset;
  std::optional<double> motion_score;
  std::string label;  // activity label, e.g. "03" for "01-03"
};

struct Fold {
  std::string name;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

struct SplitPlan {
  std::string kind;
  std::vector<Fold> folds;
};

/// Two-way partition of the video ids.
struct Partition {
  std::vector<std::string> high;
  std::vector<std::string> low;
};

/// One fold per subject (in first-appearance order) holding out all of its
/// videos. Throws SingleSubject, EmptyInput.
SplitPlan leave_one_subject_out(const std::vector<VideoEntry>& videos);

/// Per subject, the single video with the largest motion score is high
/// (first listed wins ties). Throws BadFormat for a missing score.
Partition motion_split(const std::vector<VideoEntry>& videos);

/// Videos whose label is in `high_labels` are high.
Partition label_split(const std::vector<VideoEntry>& videos,
                      const std::set<std::string>& high_labels = {"03", "04", "06"});

/// Single fold: train on every video of `train`, test on every video of `test`.
SplitPlan cross_dataset(const std::vector<VideoEntry>& train, const std::vector<VideoEntry>& test);

}  // namespace ippg
