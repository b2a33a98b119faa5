#pragma once

#include <span>
#include <vector>

namespace ippg::turnip {

/// 1 - r with r the sample Pearson correlation; lies in [0, 2].
/// Throws ConstantInput when either input has zero variance or fewer than 2 samples.
double pearson_loss(std::span<const double> pred, std::span<const double> gt);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;  // d(loss)/d(pred)
};

LossGradient pearson_loss_grad(std::span<const double> pred, std::span<const double> gt);

}  // namespace ippg::turnip
