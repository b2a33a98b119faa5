#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "ippg/error.hpp"
#include "ippg/io/formats.hpp"
#include "ippg/io/synth.hpp"
#include "ippg/preprocess.hpp"
#include "ippg/turnip/checkpoint.hpp"
#include "ippg/turnip/loss.hpp"
#include "ippg/turnip/network.hpp"
#include "ippg/turnip/optim.hpp"
#include "ippg/turnip/train.hpp"

using namespace ippg;
using namespace ippg::turnip;
using ippg::testing::TempDir;

namespace {

TurnipConfig small_config(int length = 60) {
  TurnipConfig c;
  c.stage_channels = {16, 24, 32};
  c.gru_hidden = {16, 24};
  c.window_length = length;
  c.seed = 7;
  return c;
}

// Two-pass sample correlation, written independently of the library.
double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

std::vector<double> randn(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

template <class T>
Mat<T> random_window(const TurnipConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Mat<T> x(c.input_channels, c.window_length);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = T(d(rng));
  return x;
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

// Windows from two preprocessed region-level clips.
WindowSet synthetic_windows(std::size_t length) {
  std::vector<WindowSet> sets;
  WindowSet all;
  for (std::uint64_t seed : {1u, 2u}) {
    io::RegionClipConfig cc;
    cc.duration_s = 20.0;
    cc.hr_bpm = seed == 1 ? 66.0 : 96.0;
    cc.seed = seed;
    const auto clip = io::synth_region_clip(cc);
    const auto series = preprocess_series(clip.series, {});
    const auto gt = preprocess_ground_truth(clip.gt, series.fs, {});
    auto set = make_windows(series, gt, length, 50);
    for (auto& w : set.windows) all.windows.push_back(std::move(w));
    all.length = set.length;
    all.stride = set.stride;
    all.fs = set.fs;
  }
  return all;
}

}  // namespace

TEST_CASE("pearson loss fixed points, oracle agreement and range") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto z = randn(rng, 16);
    std::vector<double> neg(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) neg[i] = -z[i];
    CHECK(std::abs(pearson_loss(z, z)) < 1e-12);
    CHECK(std::abs(pearson_loss(z, neg) - 2.0) < 1e-12);
    const auto g = randn(rng, 16);
    const double l = pearson_loss(z, g);
    CHECK(std::abs(l - (1.0 - pearson_oracle(z, g))) < 1e-12);
    CHECK(l >= 0.0);
    CHECK(l <= 2.0);
  }
}

TEST_CASE("pearson loss is invariant to positive affine maps and flips under negative ones") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = randn(rng, 40), g = randn(rng, 40);
    const double a = u(rng), b = u(rng) - 5.0;
    std::vector<double> pos(40), neg(40);
    for (std::size_t i = 0; i < 40; ++i) {
      pos[i] = a * p[i] + b;
      neg[i] = -a * p[i] + b;
    }
    const double l = pearson_loss(p, g);
    CHECK(std::abs(pearson_loss(pos, g) - l) < 1e-9);
    CHECK(std::abs(pearson_loss(neg, g) - (2.0 - l)) < 1e-9);
  }
}

TEST_CASE("pearson loss guards") {
  const std::vector<double> c(10, 3.0), z{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(code_of([&] { pearson_loss(z, c); }) == ErrorCode::ConstantInput);
  CHECK(code_of([&] { pearson_loss(c, z); }) == ErrorCode::ConstantInput);
  CHECK(code_of([&] { pearson_loss(std::vector<double>{1.0}, std::vector<double>{2.0}); }) ==
        ErrorCode::ConstantInput);
  CHECK(code_of([&] { pearson_loss(z, std::vector<double>(9, 1.0)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("pearson loss gradient: zero at pred = gt, orthogonal to pred, matches differences") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = randn(rng, 30);
    const auto at_min = pearson_loss_grad(g, g);
    for (double v : at_min.grad) CHECK(std::abs(v) < 1e-9);

    const auto p = randn(rng, 30);
    const auto lg = pearson_loss_grad(p, g);
    double along = 0;
    for (std::size_t i = 0; i < p.size(); ++i) along += lg.grad[i] * p[i];
    CHECK(std::abs(along) < 1e-9);
    std::vector<double> twice(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) twice[i] = 2.0 * p[i];
    CHECK(std::abs(pearson_loss(twice, g) - pearson_loss(p, g)) < 1e-9);

    for (std::size_t i = 0; i < p.size(); i += 7) {
      auto up = p, down = p;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd = (pearson_loss(up, g) - pearson_loss(down, g)) / 2e-6;
      CHECK(std::abs(fd - lg.grad[i]) < 1e-7);
    }
  }
}

TEST_CASE("parameter layout covers every family with consistent shapes") {
  const TurnipConfig c;
  const auto layout = parameter_layout(c);
  const auto names = parameter_names(c);
  REQUIRE(layout.size() == names.size());
  for (const char* family : {"enc1.weight", "enc2.weight", "enc3.weight", "skip1.conv.weight", "skip2.conv.weight",
                             "skip1.gru.w_ih", "skip1.gru.w_hh", "skip2.gru.b_hh", "dec2.weight", "dec1.weight",
                             "out.weight", "out.bias"}) {
    CHECK(std::find(names.begin(), names.end(), family) != names.end());
  }
  const auto params = init_params(c);
  CHECK(params.tensors().size() == layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& t = params.tensors()[i];
    CHECK(t.name == layout[i].name);
    CHECK(t.shape == layout[i].shape);
    CHECK(t.value.rows() == layout[i].rows);
    CHECK(t.value.cols() == layout[i].cols);
    long prod = 1;
    for (int d : t.shape) prod *= d;
    CHECK(prod == t.value.size());
    if (t.shape.size() == 1) CHECK(t.value.isZero(0));
  }
  CHECK(params["enc1.weight"].rows() == 128);
  CHECK(params["enc1.weight"].cols() == 7 * 48);
  CHECK(params["enc3.weight"].rows() == 512);
  CHECK(params["skip1.gru.w_hh"].rows() == 3 * 128);
  CHECK(params["out.weight"].rows() == 1);
  CHECK(params.all_finite());
  CHECK(code_of([&] { (void)params["nope"]; }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("initialization is seeded") {
  TurnipConfig c = small_config();
  const auto a = init_params(c), b = init_params(c);
  c.seed = 8;
  const auto d = init_params(c);
  CHECK(a["enc1.weight"] == b["enc1.weight"]);
  CHECK(a["enc1.weight"] != d["enc1.weight"]);
}

TEST_CASE("config validation") {
  TurnipConfig c;
  c.kernel_size = 6;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigInvalid);
  c = TurnipConfig{};
  CHECK(c.padded_length() == 252);
  c.window_length = 300;
  CHECK(c.padded_length() == 300);
  c.window_length = 3;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("forward: output length equals T for T in {250, 300}, finite on a zero window") {
  for (int len : {250, 300}) {
    TurnipConfig c;
    c.window_length = len;
    const auto params = init_params(c);
    const Mat<float> zero = Mat<float>::Zero(48, len);
    const auto y = forward<float>(zero, params, c);
    CHECK(y.size() == len);
    CHECK(y.allFinite());
    const auto x = random_window<float>(c, 5);
    const auto y2 = forward<float>(x, params, c);
    CHECK(y2.size() == len);
    CHECK(y2.allFinite());
  }
}

TEST_CASE("forward: shape contract for lengths that need padding") {
  for (int len : {60, 61, 65, 97}) {
    const TurnipConfig c = small_config(len);
    const auto params = init_params(c);
    ForwardCache<float> cache;
    const auto y = forward<float>(random_window<float>(c, 1), params, c, &cache);
    CHECK(y.size() == len);
    CHECK(cache.length == len);
    CHECK(cache.padded_length % 6 == 0);
    CHECK(cache.padded_length >= len);
  }
}

TEST_CASE("forward: identical windows give identical outputs; sentinels are ordinary inputs") {
  const TurnipConfig c = small_config(90);
  const auto params = init_params(c);
  Mat<float> x = random_window<float>(c, 9);
  const auto a = forward<float>(x, params, c);
  const auto b = forward<float>(x, params, c);
  CHECK(a == b);
  x.block(3, 10, 5, 30).setConstant(-10.0f);
  CHECK(forward<float>(x, params, c).allFinite());
}

TEST_CASE("forward: shape mismatch") {
  const TurnipConfig c = small_config();
  const auto params = init_params(c);
  CHECK(code_of([&] { forward<float>(Mat<float>::Zero(47, 60), params, c); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([&] { forward<float>(Mat<float>::Zero(48, 61), params, c); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("network input layout transposes T x signals") {
  RegionSeries s(5, 48, 1, 25.0);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t r = 0; r < 48; ++r) s.at(t, r) = double(t) * 100.0 + double(r);
  const auto x = to_network_input<double>(s);
  CHECK(x.rows() == 48);
  CHECK(x.cols() == 5);
  CHECK(x(7, 3) == 307.0);
}

TEST_CASE("backward matches central differences on every tensor (reduced widths)") {
  const auto checks = ippg::testing::gradient_check(small_config(), 20, 1e-4, 17);
  const auto layout = parameter_layout(small_config());
  REQUIRE(checks.size() == layout.size());
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& chk = checks[i];
    INFO(chk.tensor << " analytic " << chk.worst_analytic << " numeric " << chk.worst_numeric);
    // Tensors with fewer entries than requested are checked exhaustively, kinks permitting.
    const auto size = std::size_t(layout[i].rows * layout[i].cols);
    CHECK(chk.coords + chk.skipped >= std::min<std::size_t>(20, size));
    if (size >= 40) CHECK(chk.coords == 20);
    CHECK(chk.coords > 0);
    CHECK(chk.max_rel_error < 1e-3);
  }
}

TEST_CASE("backward without recurrent skips") {
  TurnipConfig c = small_config();
  c.use_gru = false;
  const auto checks = ippg::testing::gradient_check(c, 10, 1e-4, 3);
  for (const auto& chk : checks) {
    INFO(chk.tensor);
    CHECK(chk.max_rel_error < 1e-3);
  }
}

TEST_CASE("backward detects stale caches") {
  const TurnipConfig c = small_config();
  auto params = init_params(c);
  ForwardCache<float> cache;
  const auto y = forward<float>(random_window<float>(c, 2), params, c, &cache);
  const Vec<float> dy = Vec<float>::Ones(y.size());
  CHECK_NOTHROW(backward<float>(cache, params, c, dy));
  const auto other = init_params(c);
  CHECK(code_of([&] { backward<float>(cache, other, c, dy); }) == ErrorCode::StaleCache);
  params.touch();
  CHECK(code_of([&] { backward<float>(cache, params, c, dy); }) == ErrorCode::StaleCache);
}

TEST_CASE("adam: scalar step, zero gradient, pure decay, non-finite rejection") {
  ParamSet<double> p;
  p.add("w", {1}, Mat<double>::Constant(1, 1, 0.5));
  ParamSet<double> g = p.zeros_like();

  AdamState<double> s;
  s.lr = 0.1;
  s.weight_decay = 0.0;
  g["w"](0, 0) = 1.0;
  adam_step(p, g, s);
  CHECK(p["w"](0, 0) - 0.5 == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(s.step == 1);

  ParamSet<double> q;
  q.add("w", {2}, Mat<double>::Constant(2, 1, 2.0));
  AdamState<double> s0;
  s0.weight_decay = 0.0;
  adam_step(q, q.zeros_like(), s0);
  CHECK(q["w"](0, 0) == 2.0);

  AdamState<double> sd;
  sd.lr = 0.01;
  sd.weight_decay = 0.5;
  adam_step(q, q.zeros_like(), sd);
  CHECK(q["w"](1, 0) == doctest::Approx(2.0 * (1.0 - 0.01 * 0.5)).epsilon(1e-15));

  const auto before = q["w"];
  const auto version = q.version();
  auto bad = q.zeros_like();
  bad["w"](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { adam_step(q, bad, sd); }) == ErrorCode::NonFiniteGradient);
  CHECK(q["w"] == before);
  CHECK(q.version() == version);
  CHECK(sd.step == 1);

  ParamSet<double> wrong;
  wrong.add("v", {2}, Mat<double>::Zero(2, 1));
  CHECK(code_of([&] { adam_step(q, wrong, sd); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("adam: bias-corrected trajectory matches a hand-rolled scalar reference") {
  ParamSet<double> p;
  p.add("w", {1}, Mat<double>::Constant(1, 1, 1.0));
  AdamState<double> s;
  s.lr = 0.05;
  s.weight_decay = 0.01;
  double theta = 1.0, m = 0, v = 0;
  for (int k = 1; k <= 25; ++k) {
    const double grad = 2.0 * theta + std::sin(double(k));
    ParamSet<double> g = p.zeros_like();
    g["w"](0, 0) = grad;
    adam_step(p, g, s);
    theta *= 1.0 - 0.05 * 0.01;
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double mh = m / (1 - std::pow(0.9, k)), vh = v / (1 - std::pow(0.999, k));
    theta -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p["w"](0, 0) == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("training: zero epochs returns the initial params with an empty log") {
  const TurnipConfig c = small_config(100);
  const auto windows = synthetic_windows(100);
  TrainHyper h;
  h.epochs = 0;
  TrainLog log;
  const auto params = train(windows, c, h, &log);
  const auto init = init_params(c);
  for (std::size_t i = 0; i < init.tensors().size(); ++i) CHECK(params.tensors()[i].value == init.tensors()[i].value);
  CHECK(log.epochs.empty());
}

TEST_CASE("training reduces loss and is reproducible for a fixed seed") {
  const TurnipConfig c = small_config(100);
  const auto windows = synthetic_windows(100);
  REQUIRE(windows.windows.size() >= 10);
  TrainHyper h;
  h.epochs = 8;
  h.aug_prob = 0.3;
  h.seed = 5;
  TrainLog a, b;
  std::vector<int> seen;
  const auto pa = train(windows, c, h, &a, nullptr, [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  const auto pb = train(windows, c, h, &b);
  REQUIRE(a.epochs.size() == 8);
  CHECK(seen.size() == 8);
  CHECK(a.initial_loss == b.initial_loss);
  CHECK(a.augmented == b.augmented);
  CHECK(a.augmented > 0);
  for (std::size_t e = 0; e < 8; ++e) {
    CHECK(a.epochs[e].mean_loss == b.epochs[e].mean_loss);
    CHECK(a.epochs[e].lr == b.epochs[e].lr);
    CHECK(a.epochs[e].lr == doctest::Approx(h.lr * std::pow(0.99, double(e))).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < pa.tensors().size(); ++i) CHECK(pa.tensors()[i].value == pb.tensors()[i].value);
  const double final_loss = mean_loss(windows, pa, c);
  MESSAGE("initial " << a.initial_loss << " final " << final_loss);
  CHECK(final_loss < 0.5 * a.initial_loss);

  const std::string lines = a.to_json_lines();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 9);
  CHECK(lines.find("\"mean_loss\"") != std::string::npos);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  TempDir dir("ckpt");
  TurnipConfig c = small_config(80);
  c.seed = 99;
  auto params = init_params(c);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 1.0);
  for (auto& t : params.tensors())
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = float(d(rng));
  save_checkpoint(params, c, dir / "a.ckpt");
  const auto loaded = load_checkpoint(dir / "a.ckpt");
  CHECK(loaded.config == c);
  REQUIRE(loaded.params.tensors().size() == params.tensors().size());
  for (std::size_t i = 0; i < params.tensors().size(); ++i) {
    const auto& x = params.tensors()[i];
    const auto& y = loaded.params.tensors()[i];
    CHECK(x.name == y.name);
    CHECK(x.shape == y.shape);
    CHECK(std::memcmp(x.value.data(), y.value.data(), sizeof(float) * std::size_t(x.value.size())) == 0);
  }
  save_checkpoint(loaded.params, loaded.config, dir / "b.ckpt");
  CHECK(io::read_text(dir / "a.ckpt") == io::read_text(dir / "b.ckpt"));
}

TEST_CASE("checkpoint corruption is detected") {
  TempDir dir("ckpt_bad");
  const TurnipConfig c = small_config(80);
  save_checkpoint(init_params(c), c, dir / "good.ckpt");
  const std::string bytes = io::read_text(dir / "good.ckpt");

  io::write_text(dir / "trunc.ckpt", bytes.substr(0, bytes.size() - 10));
  CHECK(code_of([&] { load_checkpoint(dir / "trunc.ckpt"); }) == ErrorCode::CorruptCheckpoint);

  std::string magic = bytes;
  magic[0] = 'X';
  io::write_text(dir / "magic.ckpt", magic);
  CHECK(code_of([&] { load_checkpoint(dir / "magic.ckpt"); }) == ErrorCode::CorruptCheckpoint);

  io::write_text(dir / "short.ckpt", bytes.substr(0, 12));
  CHECK(code_of([&] { load_checkpoint(dir / "short.ckpt"); }) == ErrorCode::CorruptCheckpoint);

  std::string huge = bytes;
  huge[12] = '\xff';
  huge[19] = '\x7f';
  io::write_text(dir / "huge.ckpt", huge);
  CHECK(code_of([&] { load_checkpoint(dir / "huge.ckpt"); }) == ErrorCode::CorruptCheckpoint);

  io::write_text(dir / "extra.ckpt", bytes + "xxxx");
  CHECK(code_of([&] { load_checkpoint(dir / "extra.ckpt"); }) == ErrorCode::CorruptCheckpoint);

  CHECK(code_of([&] { load_checkpoint(dir / "missing.ckpt"); }) == ErrorCode::IoFailure);
}

TEST_CASE("checkpoint incompatible with the expected configuration") {
  TempDir dir("ckpt_cfg");
  const TurnipConfig c = small_config(80);
  save_checkpoint(init_params(c), c, dir / "a.ckpt");
  TurnipConfig wider = c;
  wider.stage_channels = {16, 24, 40};
  CHECK(code_of([&] { load_checkpoint(dir / "a.ckpt", &wider); }) == ErrorCode::CorruptCheckpoint);
  TurnipConfig other_t = c;
  other_t.window_length = 250;
  CHECK_NOTHROW(load_checkpoint(dir / "a.ckpt", &other_t));
  // Tensors that disagree with the stored config.
  save_checkpoint(init_params(wider), c, dir / "mixed.ckpt");
  CHECK(code_of([&] { load_checkpoint(dir / "mixed.ckpt"); }) == ErrorCode::CorruptCheckpoint);
}

TEST_CASE("config JSON round-trip and validation") {
  TurnipConfig c = small_config(123);
  c.use_gru = false;
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json("{}") == TurnipConfig{});
  CHECK(code_of([] { config_from_json("{not json"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { config_from_json("{\"kernel_size\": 4}"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { config_from_json("{\"stage_channels\": \"wide\"}"); }) == ErrorCode::ConfigInvalid);
}
