#include "ippg/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "ippg/error.hpp"

namespace ippg {

namespace {

void require(std::span<const HrPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no heart-rate pairs");
}

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

double mae(std::span<const HrPair> pairs) {
  require(pairs);
  double s = 0.0;
  for (const auto& p : pairs) s += std::abs(p.gt_bpm - p.pred_bpm);
  return s / double(pairs.size());
}

double rmse(std::span<const HrPair> pairs) {
  require(pairs);
  double s = 0.0;
  for (const auto& p : pairs) s += (p.gt_bpm - p.pred_bpm) * (p.gt_bpm - p.pred_bpm);
  return std::sqrt(s / double(pairs.size()));
}

double pte6(std::span<const HrPair> pairs) {
  require(pairs);
  std::size_t hits = 0;
  for (const auto& p : pairs) hits += std::abs(p.gt_bpm - p.pred_bpm) < 6.0 ? 1 : 0;
  return 100.0 * double(hits) / double(pairs.size());
}

BlandAltman bland_altman(std::span<const HrPair> pairs, bool sample_sd) {
  if (pairs.size() < 2) throw Error(ErrorCode::TooFewPoints, "need at least two pairs");
  BlandAltman ba;
  ba.pairs.assign(pairs.begin(), pairs.end());
  for (const auto& p : pairs) ba.diffs.push_back(p.gt_bpm - p.pred_bpm);
  double s = 0.0;
  for (double d : ba.diffs) s += d;
  ba.mean_diff = s / double(ba.diffs.size());
  double ss = 0.0;
  for (double d : ba.diffs) ss += (d - ba.mean_diff) * (d - ba.mean_diff);
  ba.sd = std::sqrt(ss / double(ba.diffs.size() - (sample_sd ? 1 : 0)));
  ba.lower = ba.mean_diff - 1.96 * ba.sd;
  ba.upper = ba.mean_diff + 1.96 * ba.sd;
  return ba;
}

std::string BlandAltman::table() const {
  std::string out = "gt diff\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out += format("%.17g %.17g\n", pairs[i].gt_bpm, diffs[i]);
  }
  return out;
}

std::vector<HrPair> EvalReport::pairs() const {
  std::vector<HrPair> out;
  for (const auto& r : records) out.push_back({r.gt_bpm, r.pred_bpm});
  return out;
}

bool EvalReport::self_consistent() const {
  if (records.empty()) return false;
  const auto p = pairs();
  const double m = mae(p), r = rmse(p), e = pte6(p);
  return m == mae_bpm && r == rmse_bpm && e == pte6_pct && mae_bpm <= rmse_bpm;
}

std::string EvalReport::to_text() const {
  std::string out;
  for (const auto& r : records) {
    out += format("record window=%s subject=%s gt_bpm=%.17g pred_bpm=%.17g\n", r.window_id.c_str(),
                  r.subject_id.c_str(), r.gt_bpm, r.pred_bpm);
  }
  out += format("summary n=%zu mae_bpm=%.17g rmse_bpm=%.17g pte6_pct=%.17g\n", records.size(),
                mae_bpm, rmse_bpm, pte6_pct);
  return out;
}

std::string EvalReport::summary() const {
  return format("MAE %.2f, RMSE %.2f, PTE6 %.2f", mae_bpm, rmse_bpm, pte6_pct);
}

EvalReport make_report(std::vector<EvalRecord> records) {
  EvalReport rep;
  rep.records = std::move(records);
  const auto p = rep.pairs();
  rep.mae_bpm = mae(p);
  rep.rmse_bpm = rmse(p);
  rep.pte6_pct = pte6(p);
  return rep;
}

}  // namespace ippg
