#pragma once

#include <span>
#include <string>
#include <vector>

namespace ippg {

struct HrPair {
  double gt_bpm = 0.0;
  double pred_bpm = 0.0;
};

/// Throw EmptyInput for no pairs.
double mae(std::span<const HrPair> pairs);
double rmse(std::span<const HrPair> pairs);
/// Percentage of pairs with |error| strictly below 6 bpm.
double pte6(std::span<const HrPair> pairs);

struct BlandAltman {
  std::vector<HrPair> pairs;
  std::vector<double> diffs;  // gt - pred, parallel to pairs
  double mean_diff = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // mean_diff - 1.96 sd
  double upper = 0.0;

  /// "gt diff" header then one row per pair.
  std::string table() const;
};

/// Limits use the population standard deviation unless `sample_sd`.
/// Throws TooFewPoints below two pairs.
BlandAltman bland_altman(std::span<const HrPair> pairs, bool sample_sd = false);

struct EvalRecord {
  std::string window_id;
  std::string subject_id;
  double gt_bpm = 0.0;
  double pred_bpm = 0.0;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  double mae_bpm = 0.0;
  double rmse_bpm = 0.0;
  double pte6_pct = 0.0;

  std::vector<HrPair> pairs() const;
  /// Aggregates recomputed from the records equal the stored ones exactly and MAE <= RMSE.
  bool self_consistent() const;
  /// One "record ..." line per window followed by a summary line.
  std::string to_text() const;
  /// Summary in the usual table-row shape, e.g. "MAE 1.17, RMSE 3.46, PTE6 93.21".
  std::string summary() const;
};

/// Throws EmptyInput.
EvalReport make_report(std::vector<EvalRecord> records);

}  // namespace ippg
