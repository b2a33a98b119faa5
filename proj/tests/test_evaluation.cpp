#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "ippg/error.hpp"
#include "ippg/evaluation.hpp"
#include "ippg/splits.hpp"

using namespace ippg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ippg::Error");
  return ErrorCode::Usage;
}

std::vector<HrPair> random_pairs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> hr(45.0, 180.0);
  std::normal_distribution<double> err(0.0, 5.0);
  std::vector<HrPair> p(n);
  for (auto& x : p) {
    x.gt_bpm = hr(rng);
    x.pred_bpm = x.gt_bpm + err(rng);
  }
  return p;
}

VideoEntry video(std::string id, std::string subject, double motion = 0.0, std::string label = "") {
  return {std::move(id), std::move(subject), "synth", motion, std::move(label)};
}

}  // namespace

TEST_CASE("PTE6 uses a strict threshold") {
  const std::vector<HrPair> p{{0.0, 5.9}, {0.0, 6.0}, {0.0, 6.1}};
  CHECK(pte6(p) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("MAE and RMSE closed forms") {
  const std::vector<HrPair> p{{70.0, 73.0}, {80.0, 76.0}};
  CHECK(mae(p) == 3.5);
  CHECK(rmse(p) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(rmse(p) == doctest::Approx(3.5355).epsilon(1e-4));
  CHECK(pte6(p) == 100.0);
}

TEST_CASE("perfect predictions and empty input") {
  const std::vector<HrPair> p{{60.0, 60.0}, {91.5, 91.5}};
  CHECK(mae(p) == 0.0);
  CHECK(rmse(p) == 0.0);
  CHECK(pte6(p) == 100.0);
  const std::vector<HrPair> none;
  CHECK(code_of([&] { mae(none); }) == ErrorCode::EmptyInput);
  CHECK(code_of([&] { rmse(none); }) == ErrorCode::EmptyInput);
  CHECK(code_of([&] { pte6(none); }) == ErrorCode::EmptyInput);
  CHECK(code_of([&] { make_report({}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("MAE never exceeds RMSE and PTE6 ignores common shifts") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    auto p = random_pairs(rng, size(rng));
    CHECK(mae(p) <= rmse(p));
    const double base = pte6(p);
    for (auto& x : p) {
      x.gt_bpm += 17.0;
      x.pred_bpm += 17.0;
    }
    CHECK(pte6(p) == base);
  }
}

TEST_CASE("Bland-Altman hand example") {
  const std::vector<HrPair> p{{70.0, 68.0}, {80.0, 84.0}};
  const auto ba = bland_altman(p);
  REQUIRE(ba.diffs.size() == 2);
  CHECK(ba.diffs[0] == 2.0);
  CHECK(ba.diffs[1] == -4.0);
  CHECK(ba.mean_diff == -1.0);
  CHECK(ba.sd == 3.0);
  CHECK(ba.lower == doctest::Approx(-1.0 - 5.88).epsilon(1e-12));
  CHECK(ba.upper == doctest::Approx(-1.0 + 5.88).epsilon(1e-12));
  CHECK(bland_altman(p, true).sd == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ba.table() == "gt diff\n70 2\n80 -4\n");
}

TEST_CASE("Bland-Altman: constant offset and a random oracle") {
  std::vector<HrPair> shifted;
  for (double g : {60.0, 72.0, 95.0, 120.0}) shifted.push_back({g, g - 2.5});
  const auto s = bland_altman(shifted);
  CHECK(s.mean_diff == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(s.sd < 1e-12);

  std::mt19937_64 rng(12);
  const auto p = random_pairs(rng, 200);
  const auto ba = bland_altman(p);
  // Welford running variance as the independent oracle.
  double m = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i].gt_bpm - p[i].pred_bpm;
    const double delta = d - m;
    m += delta / double(i + 1);
    m2 += delta * (d - m);
  }
  const double sd = std::sqrt(m2 / double(p.size()));
  CHECK(ba.mean_diff == doctest::Approx(m).epsilon(1e-10));
  CHECK(ba.sd == doctest::Approx(sd).epsilon(1e-10));
  CHECK(ba.upper - ba.lower == doctest::Approx(2.0 * 1.96 * sd).epsilon(1e-10));

  const std::vector<HrPair> one{{70.0, 70.0}};
  CHECK(code_of([&] { bland_altman(one); }) == ErrorCode::TooFewPoints);
}

TEST_CASE("report aggregates, text export and summary format") {
  std::vector<EvalRecord> recs{{"v1:w0", "s1", 70.0, 71.0}, {"v1:w1", "s1", 72.0, 80.0},
                               {"v2:w0", "s2", 90.0, 89.5}};
  const auto rep = make_report(recs);
  CHECK(rep.mae_bpm == doctest::Approx((1.0 + 8.0 + 0.5) / 3.0).epsilon(1e-15));
  CHECK(rep.pte6_pct == doctest::Approx(200.0 / 3.0).epsilon(1e-12));
  CHECK(rep.self_consistent());

  auto tampered = rep;
  tampered.mae_bpm += 1e-9;
  CHECK_FALSE(tampered.self_consistent());

  const auto text = rep.to_text();
  std::istringstream in(text);
  std::string line;
  int records = 0, summaries = 0;
  while (std::getline(in, line)) {
    if (line.rfind("record ", 0) == 0) ++records;
    if (line.rfind("summary ", 0) == 0) ++summaries;
  }
  CHECK(records == 3);
  CHECK(summaries == 1);
  CHECK(text.find("window=v1:w1 subject=s1 gt_bpm=72 pred_bpm=80") != std::string::npos);

  EvalReport fixed;
  fixed.mae_bpm = 1.17;
  fixed.rmse_bpm = 3.46;
  fixed.pte6_pct = 93.21;
  CHECK(fixed.summary() == "MAE 1.17, RMSE 3.46, PTE6 93.21");
}

TEST_CASE("leave-one-subject-out folds partition the videos") {
  std::vector<VideoEntry> v{video("a1", "A"), video("b1", "B"), video("a2", "A"),
                            video("c1", "C"), video("b2", "B"), video("c2", "C")};
  const auto plan = leave_one_subject_out(v);
  CHECK(plan.kind == "loso");
  REQUIRE(plan.folds.size() == 3);
  CHECK(plan.folds[0].name == "A");
  CHECK(plan.folds[1].name == "B");
  CHECK(plan.folds[2].name == "C");
  CHECK(plan.folds[0].test == std::vector<std::string>{"a1", "a2"});
  std::map<std::string, int> tested;
  for (const auto& f : plan.folds) {
    CHECK(f.train.size() + f.test.size() == v.size());
    for (const auto& id : f.test) {
      ++tested[id];
      CHECK(std::find(f.train.begin(), f.train.end(), id) == f.train.end());
    }
    // No subject appears on both sides.
    for (const auto& e : v) {
      const bool in_test = std::find(f.test.begin(), f.test.end(), e.video_id) != f.test.end();
      CHECK(in_test == (e.subject_id == f.name));
    }
  }
  CHECK(tested.size() == v.size());
  for (const auto& [id, n] : tested) CHECK(n == 1);

  CHECK(code_of([] { leave_one_subject_out({video("x", "S"), video("y", "S")}); }) == ErrorCode::SingleSubject);
  CHECK(code_of([] { leave_one_subject_out({}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("motion split picks the most moving video per subject") {
  std::vector<VideoEntry> v{video("a1", "A", 2.0), video("a2", "A", 5.0), video("b1", "B", 1.0),
                            video("b2", "B", 1.0)};
  const auto p = motion_split(v);
  CHECK(p.high == std::vector<std::string>{"a2", "b1"});
  CHECK(p.low == std::vector<std::string>{"a1", "b2"});
  v[0].motion_score.reset();
  CHECK(code_of([&] { motion_split(v); }) == ErrorCode::BadFormat);
}

TEST_CASE("label split and cross-dataset plan") {
  std::vector<VideoEntry> v;
  for (const char* l : {"01", "02", "03", "04", "05", "06"}) v.push_back(video(std::string("s-") + l, "S", 0.0, l));
  const auto p = label_split(v);
  CHECK(p.high == std::vector<std::string>{"s-03", "s-04", "s-06"});
  CHECK(p.low == std::vector<std::string>{"s-01", "s-02", "s-05"});
  const auto custom = label_split(v, {"01"});
  CHECK(custom.high == std::vector<std::string>{"s-01"});

  const std::vector<VideoEntry> train{video("t1", "A"), video("t2", "B")}, test{video("u1", "C")};
  const auto plan = cross_dataset(train, test);
  REQUIRE(plan.folds.size() == 1);
  CHECK(plan.folds[0].train == std::vector<std::string>{"t1", "t2"});
  CHECK(plan.folds[0].test == std::vector<std::string>{"u1"});
  CHECK(code_of([&] { cross_dataset(train, {}); }) == ErrorCode::EmptyInput);
}
