#include "ippg/turnip/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ippg/error.hpp"

namespace ippg::turnip {

namespace {

struct Centered {
  std::vector<double> p, g;
  double pp = 0.0, gg = 0.0, pg = 0.0;
};

Centered center(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and target differ in length");
  }
  if (pred.size() < 2) throw Error(ErrorCode::ConstantInput, "need at least two samples");
  const double n = static_cast<double>(pred.size());
  double sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sp += pred[i];
    sg += gt[i];
  }
  Centered c;
  c.p.resize(pred.size());
  c.g.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    c.p[i] = pred[i] - sp / n;
    c.g[i] = gt[i] - sg / n;
    c.pp += c.p[i] * c.p[i];
    c.gg += c.g[i] * c.g[i];
    c.pg += c.p[i] * c.g[i];
  }
  if (!(c.pp > 0.0) || !(c.gg > 0.0)) {
    throw Error(ErrorCode::ConstantInput, std::string(c.pp > 0.0 ? "target" : "prediction") +
                                              " has zero variance");
  }
  return c;
}

}  // namespace

double pearson_loss(std::span<const double> pred, std::span<const double> gt) {
  const Centered c = center(pred, gt);
  const double r = std::clamp(c.pg / std::sqrt(c.pp * c.gg), -1.0, 1.0);
  return 1.0 - r;
}

LossGradient pearson_loss_grad(std::span<const double> pred, std::span<const double> gt) {
  const Centered c = center(pred, gt);
  const double np = std::sqrt(c.pp), ng = std::sqrt(c.gg);
  const double r = c.pg / (np * ng);
  LossGradient out;
  out.loss = 1.0 - std::clamp(r, -1.0, 1.0);
  out.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.grad[i] = -(c.g[i] / (np * ng) - r * c.p[i] / c.pp);
  }
  return out;
}

}  // namespace ippg::turnip
