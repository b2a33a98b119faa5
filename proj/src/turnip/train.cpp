#include "ippg/turnip/train.hpp"

#include <algorithm>
#include <chrono>
#include <json.hpp>
#include <numeric>
#include <optional>

#include "ippg/error.hpp"
#include "ippg/turnip/loss.hpp"
#include "ippg/turnip/network.hpp"
#include "ippg/turnip/optim.hpp"

namespace ippg::turnip {

namespace {

std::vector<double> to_double(const Vec<float>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::optional<Window> augment(const Window& w, bool speedup, double c) {
  try {
    if (speedup) return speedup_augment(w, c);
    if (!w.source || !w.source_gt) return std::nullopt;
    return slowdown_augment(*w.source, *w.source_gt, w.offset, c, w.data.frames);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::WindowOutOfBounds || e.code() == ErrorCode::SentinelInWindow) {
      return std::nullopt;
    }
    throw;
  }
}

}  // namespace

std::string TrainLog::to_json_lines() const {
  std::string out = nlohmann::json{{"initial_loss", initial_loss}}.dump() + "\n";
  for (const auto& e : epochs) {
    out += nlohmann::json{{"epoch", e.epoch},
                          {"lr", e.lr},
                          {"mean_loss", e.mean_loss},
                          {"wall_time", e.wall_time}}
               .dump() +
           "\n";
  }
  return out;
}

double mean_loss(const WindowSet& windows, const TurnipParams& params, const TurnipConfig& config) {
  if (windows.windows.empty()) throw Error(ErrorCode::EmptyInput, "no windows");
  double sum = 0.0;
  for (const auto& w : windows.windows) {
    const auto pred = to_double(forward<float>(to_network_input<float>(w.data), params, config));
    sum += pearson_loss(pred, w.gt);
  }
  return sum / static_cast<double>(windows.windows.size());
}

TurnipParams train(const WindowSet& windows, const TurnipConfig& config, const TrainHyper& hyper,
                   TrainLog* log, const TurnipParams* init, const EpochCallback& on_epoch) {
  TurnipParams params = init ? *init : init_params(config);
  if (log) *log = TrainLog{};
  if (hyper.epochs <= 0) return params;
  if (windows.windows.empty()) throw Error(ErrorCode::EmptyInput, "training needs at least one window");
  if (hyper.batch_size < 1) throw Error(ErrorCode::ConfigInvalid, "batch_size must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  if (log) log->initial_loss = mean_loss(windows, params, config);

  std::mt19937_64 rng(hyper.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AdamState<float> state;
  state.lr = hyper.lr;
  state.weight_decay = hyper.weight_decay;

  std::vector<std::size_t> order(windows.windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ForwardCache<float> cache;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(hyper.batch_size));
      const std::size_t batch = end - pos;
      ParamSet<float> grads = params.zeros_like();
      for (; pos < end; ++pos) {
        const Window& base = windows.windows[order[pos]];
        std::optional<Window> variant;
        if (hyper.aug_prob > 0.0 && unit(rng) < hyper.aug_prob) {
          const bool speedup = unit(rng) < 0.5;
          const double c = draw_augmentation_factor(rng, hyper.aug_min, hyper.aug_max);
          variant = augment(base, speedup, c);
          if (variant && log) ++log->augmented;
        }
        const Window& w = variant ? *variant : base;
        const auto pred = forward<float>(to_network_input<float>(w.data), params, config, &cache);
        const LossGradient lg = pearson_loss_grad(to_double(pred), w.gt);
        loss_sum += lg.loss;
        Vec<float> g(static_cast<Eigen::Index>(lg.grad.size()));
        for (std::size_t i = 0; i < lg.grad.size(); ++i) g(static_cast<Eigen::Index>(i)) = float(lg.grad[i]);
        const ParamSet<float> wg = backward<float>(cache, params, config, g);
        for (std::size_t i = 0; i < grads.tensors().size(); ++i) {
          grads.tensors()[i].value += wg.tensors()[i].value;
        }
      }
      if (batch > 1) {
        const float scale = 1.0f / float(batch);
        for (auto& t : grads.tensors()) t.value *= scale;
      }
      adam_step(params, grads, state);
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = state.lr;
    rec.mean_loss = loss_sum / static_cast<double>(order.size());
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) log->epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    state.lr *= hyper.lr_decay;
  }
  return params;
}

}  // namespace ippg::turnip
