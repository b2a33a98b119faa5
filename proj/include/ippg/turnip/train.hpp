#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ippg/preprocess.hpp"
#include "ippg/turnip/params.hpp"

namespace ippg::turnip {

struct TrainHyper {
  double lr = 1.5e-3;
  double weight_decay = 1e-4;
  double lr_decay = 0.99;  // applied after every epoch
  int epochs = 8;
  double aug_prob = 0.0;
  double aug_min = 0.2;
  double aug_max = 0.4;
  int batch_size = 1;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double wall_time = 0.0;  // seconds since training started
};

struct TrainLog {
  double initial_loss = 0.0;  // mean loss of the initial params over the unaugmented windows
  std::vector<EpochRecord> epochs;
  std::size_t augmented = 0;

  /// One JSON object per line: an "initial" record then one per epoch.
  std::string to_json_lines() const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean Pearson loss of `params` over the windows.
double mean_loss(const WindowSet& windows, const TurnipParams& params, const TurnipConfig& config);

/// Trains from `init` (or fresh seeded params) on the windows. Each epoch
/// visits the windows in a seeded shuffled order; with probability aug_prob
/// a window is swapped for a SpeedUp or SlowDown variant chosen by a coin
/// flip, falling back to the original when the variant is not available.
/// Gradients of a batch are summed in visiting order and averaged.
TurnipParams train(const WindowSet& windows, const TurnipConfig& config, const TrainHyper& hyper,
                   TrainLog* log = nullptr, const TurnipParams* init = nullptr,
                   const EpochCallback& on_epoch = {});

}  // namespace ippg::turnip
