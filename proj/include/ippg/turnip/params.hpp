#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ippg::turnip {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Architecture of the three-stage recurrent U-Net.
struct TurnipConfig {
  int input_channels = 48;
  std::array<int, 3> stage_channels{128, 256, 512};
  std::array<int, 2> downsample_factors{3, 2};
  int kernel_size = 7;
  // Hidden size of the recurrent skip at the two upper resolutions.
  std::array<int, 2> gru_hidden{128, 256};
  bool use_gru = true;
  int window_length = 250;
  std::uint64_t seed = 0;

  int total_downsample() const { return downsample_factors[0] * downsample_factors[1]; }
  /// Window length after reflect-padding to a multiple of the total downsample.
  int padded_length() const;
  /// Throws ConfigInvalid.
  void validate() const;

  friend bool operator==(const TurnipConfig&, const TurnipConfig&) = default;
};

/// A named parameter tensor. Stored as a matrix: conv weights are
/// out x (kernel * in) with tap-major columns, biases are column vectors.
template <class T>
struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  Mat<T> value;
};

template <class T>
class ParamSet {
 public:
  std::vector<NamedTensor<T>>& tensors() { return tensors_; }
  const std::vector<NamedTensor<T>>& tensors() const { return tensors_; }

  void add(std::string name, std::vector<int> shape, Mat<T> value) {
    tensors_.push_back({std::move(name), std::move(shape), std::move(value)});
  }
  /// Throws ShapeMismatch for unknown names.
  const Mat<T>& operator[](std::string_view name) const;
  Mat<T>& operator[](std::string_view name);
  const NamedTensor<T>* find(std::string_view name) const;

  std::size_t parameter_count() const;

  /// Same names and shapes, all values zero.
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;
  bool all_finite() const;

  /// Bumped on every in-place update so forward caches can detect staleness.
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  template <class U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& t : tensors_) out.add(t.name, t.shape, t.value.template cast<U>());
    return out;
  }

 private:
  std::vector<NamedTensor<T>> tensors_;
  std::uint64_t version_ = 0;
};

using TurnipParams = ParamSet<float>;

/// Fan-in scaled uniform weights (He-uniform ahead of ReLU), zero biases.
TurnipParams init_params(const TurnipConfig& config);

/// Name, logical shape and storage matrix size of one parameter tensor.
struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  int rows = 0;
  int cols = 0;
};

/// Parameter tensors in manifest order, without allocating values.
std::vector<TensorSpec> parameter_layout(const TurnipConfig& config);

/// Names of the parameter tensors in manifest order.
std::vector<std::string> parameter_names(const TurnipConfig& config);

extern template class ParamSet<float>;
extern template class ParamSet<double>;

}  // namespace ippg::turnip
