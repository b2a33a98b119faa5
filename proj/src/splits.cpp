#include "ippg/splits.hpp"

#include <algorithm>
#include <map>

#include "ippg/error.hpp"

namespace ippg {

SplitPlan leave_one_subject_out(const std::vector<VideoEntry>& videos) {
  if (videos.empty()) throw Error(ErrorCode::EmptyInput, "empty manifest");
  std::vector<std::string> subjects;
  for (const auto& v : videos) {
    if (std::find(subjects.begin(), subjects.end(), v.subject_id) == subjects.end()) {
      subjects.push_back(v.subject_id);
    }
  }
  if (subjects.size() < 2) {
    throw Error(ErrorCode::SingleSubject, "leave-one-subject-out needs two or more subjects");
  }
  SplitPlan plan{"loso", {}};
  for (const auto& s : subjects) {
    Fold f{s, {}, {}};
    for (const auto& v : videos) (v.subject_id == s ? f.test : f.train).push_back(v.video_id);
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

Partition motion_split(const std::vector<VideoEntry>& videos) {
  std::map<std::string, const VideoEntry*> top;
  for (const auto& v : videos) {
    if (!v.motion_score) throw Error(ErrorCode::BadFormat, "video " + v.video_id + " has no motion score");
    auto [it, fresh] = top.emplace(v.subject_id, &v);
    if (!fresh && *v.motion_score > *it->second->motion_score) it->second = &v;
  }
  Partition p;
  for (const auto& v : videos) (top.at(v.subject_id) == &v ? p.high : p.low).push_back(v.video_id);
  return p;
}

Partition label_split(const std::vector<VideoEntry>& videos, const std::set<std::string>& high_labels) {
  Partition p;
  for (const auto& v : videos) (high_labels.count(v.label) ? p.high : p.low).push_back(v.video_id);
  return p;
}

SplitPlan cross_dataset(const std::vector<VideoEntry>& train, const std::vector<VideoEntry>& test) {
  if (train.empty() || test.empty()) throw Error(ErrorCode::EmptyInput, "both manifests must be non-empty");
  Fold f{"cross", {}, {}};
  for (const auto& v : train) f.train.push_back(v.video_id);
  for (const auto& v : test) f.test.push_back(v.video_id);
  return {"cross_dataset", {std::move(f)}};
}

}  // namespace ippg
