#pragma once

#include <cmath>
#include <vector>

#include "ippg/error.hpp"
#include "ippg/turnip/params.hpp"

namespace ippg::turnip {

template <class T>
struct AdamState {
  std::vector<Mat<T>> m, v;  // parallel to the parameter tensors; empty until the first step
  std::uint64_t step = 0;
  double lr = 1.5e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update with decoupled weight decay
/// (theta <- theta - lr * wd * theta ahead of the moment update).
/// A non-finite gradient leaves params and state untouched and throws NonFiniteGradient.
template <class T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState<T>& state) {
  if (!params.same_layout(grads)) {
    throw Error(ErrorCode::ShapeMismatch, "gradient layout differs from parameters");
  }
  if (!grads.all_finite()) {
    throw Error(ErrorCode::NonFiniteGradient, "gradient has non-finite entries; step rejected");
  }
  auto& tensors = params.tensors();
  if (state.m.empty()) {
    for (const auto& t : tensors) {
      state.m.push_back(Mat<T>::Zero(t.value.rows(), t.value.cols()));
      state.v.push_back(Mat<T>::Zero(t.value.rows(), t.value.cols()));
    }
  }
  if (state.m.size() != tensors.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match parameters");
  }
  ++state.step;
  const double k = static_cast<double>(state.step);
  const T c1 = T(1.0 / (1.0 - std::pow(state.beta1, k)));
  const T c2 = T(1.0 / (1.0 - std::pow(state.beta2, k)));
  const T lr = T(state.lr), b1 = T(state.beta1), b2 = T(state.beta2), eps = T(state.eps);
  const T decay = T(1.0 - state.lr * state.weight_decay);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto theta = tensors[i].value.array();
    const auto g = grads.tensors()[i].value.array();
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    if (state.weight_decay != 0.0) theta *= decay;
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.square();
    theta -= lr * (m * c1) / ((v * c2).sqrt() + eps);
  }
  params.touch();
}

}  // namespace ippg::turnip
