#include "ippg/turnip/params.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "ippg/error.hpp"

namespace ippg::turnip {

int TurnipConfig::padded_length() const {
  const int f = total_downsample();
  return (window_length + f - 1) / f * f;
}

void TurnipConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (input_channels <= 0) fail("input_channels must be positive");
  for (int c : stage_channels) {
    if (c <= 0) fail("stage channels must be positive");
  }
  for (int f : downsample_factors) {
    if (f < 1) fail("downsample factors must be >= 1");
  }
  for (int h : gru_hidden) {
    if (use_gru && h <= 0) fail("gru hidden sizes must be positive");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) fail("kernel_size must be odd");
  if (window_length < 2) fail("window_length must be >= 2");
  if (padded_length() - window_length >= window_length) fail("window too short to reflect-pad");
}

template <class T>
const NamedTensor<T>* ParamSet<T>::find(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <class T>
const Mat<T>& ParamSet<T>::operator[](std::string_view name) const {
  if (const auto* t = find(name)) return t->value;
  throw Error(ErrorCode::ShapeMismatch, "no parameter named " + std::string(name));
}

template <class T>
Mat<T>& ParamSet<T>::operator[](std::string_view name) {
  return const_cast<Mat<T>&>(std::as_const(*this)[name]);
}

template <class T>
std::size_t ParamSet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

template <class T>
ParamSet<T> ParamSet<T>::zeros_like() const {
  ParamSet out;
  for (const auto& t : tensors_) {
    out.add(t.name, t.shape, Mat<T>::Zero(t.value.rows(), t.value.cols()));
  }
  return out;
}

template <class T>
bool ParamSet<T>::same_layout(const ParamSet& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i];
    const auto& b = other.tensors_[i];
    if (a.name != b.name || a.shape != b.shape || a.value.rows() != b.value.rows() ||
        a.value.cols() != b.value.cols()) {
      return false;
    }
  }
  return true;
}

template <class T>
bool ParamSet<T>::all_finite() const {
  for (const auto& t : tensors_) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

template class ParamSet<float>;
template class ParamSet<double>;

namespace {

struct Layer {
  std::string name;
  int out;
  int in;
  int kernel;  // 1 for pointwise
  bool relu;
};

struct Gru {
  std::string name;
  int in;
  int hidden;
};

struct Layout {
  std::vector<Layer> convs;
  std::vector<Gru> grus;
};

// Tensor order: enc1..3, skip1 (conv, gru), skip2 (conv, gru), dec2, dec1, out.
Layout layout(const TurnipConfig& c) {
  const auto [c1, c2, c3] = c.stage_channels;
  const int k = c.kernel_size;
  const int skip1 = c1 + (c.use_gru ? c.gru_hidden[0] : 0);
  const int skip2 = c2 + (c.use_gru ? c.gru_hidden[1] : 0);
  Layout l;
  l.convs = {
      {"enc1", c1, c.input_channels, k, true},
      {"enc2", c2, c1, k, true},
      {"enc3", c3, c2, k, true},
      {"skip1.conv", c1, c1, 1, false},
      {"skip2.conv", c2, c2, 1, false},
      {"dec2", c2, c3 + skip2, k, true},
      {"dec1", c1, c2 + skip1, k, true},
      {"out", 1, c1, 1, false},
  };
  if (c.use_gru) {
    l.grus = {{"skip1.gru", c1, c.gru_hidden[0]}, {"skip2.gru", c2, c.gru_hidden[1]}};
  }
  return l;
}

}  // namespace

std::vector<TensorSpec> parameter_layout(const TurnipConfig& config) {
  const Layout l = layout(config);
  std::vector<TensorSpec> specs;
  auto add_conv = [&](const Layer& layer) {
    std::vector<int> shape = layer.kernel == 1 ? std::vector<int>{layer.out, layer.in}
                                               : std::vector<int>{layer.out, layer.kernel, layer.in};
    specs.push_back({layer.name + ".weight", shape, layer.out, layer.in * layer.kernel});
    specs.push_back({layer.name + ".bias", {layer.out}, layer.out, 1});
  };
  auto add_gru = [&](const Gru& g) {
    specs.push_back({g.name + ".w_ih", {3 * g.hidden, g.in}, 3 * g.hidden, g.in});
    specs.push_back({g.name + ".w_hh", {3 * g.hidden, g.hidden}, 3 * g.hidden, g.hidden});
    specs.push_back({g.name + ".b_ih", {3 * g.hidden}, 3 * g.hidden, 1});
    specs.push_back({g.name + ".b_hh", {3 * g.hidden}, 3 * g.hidden, 1});
  };
  for (int i = 0; i < 4; ++i) add_conv(l.convs[i]);
  if (config.use_gru) add_gru(l.grus[0]);
  add_conv(l.convs[4]);
  if (config.use_gru) add_gru(l.grus[1]);
  for (int i = 5; i < 8; ++i) add_conv(l.convs[i]);
  return specs;
}

std::vector<std::string> parameter_names(const TurnipConfig& config) {
  std::vector<std::string> names;
  for (const auto& p : parameter_layout(config)) names.push_back(p.name);
  return names;
}

TurnipParams init_params(const TurnipConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  auto uniform = [&rng](Eigen::Index rows, Eigen::Index cols, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat<float> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<float>(dist(rng));
    }
    return m;
  };

  // Convs ahead of a ReLU use He-uniform bounds, everything else 1/sqrt(fan_in);
  // GRU matrices use 1/sqrt(hidden).
  const Layout l = layout(config);
  auto relu_follows = [&l](const std::string& name) {
    for (const auto& c : l.convs) {
      if (name == c.name + ".weight") return c.relu;
    }
    return false;
  };
  TurnipParams params;
  for (const auto& spec : parameter_layout(config)) {
    const bool bias = spec.shape.size() == 1;
    if (bias) {
      params.add(spec.name, spec.shape, Mat<float>::Zero(spec.rows, 1));
      continue;
    }
    const bool gru = spec.name.find(".gru.") != std::string::npos;
    const double bound = gru              ? 1.0 / std::sqrt(double(spec.rows / 3))
                         : relu_follows(spec.name) ? std::sqrt(6.0 / spec.cols)
                                                   : 1.0 / std::sqrt(double(spec.cols));
    params.add(spec.name, spec.shape, uniform(spec.rows, spec.cols, bound));
  }
  return params;
}

}  // namespace ippg::turnip
