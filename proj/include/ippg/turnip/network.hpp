#pragma once

#include <span>
#include <vector>

#include "ippg/region_series.hpp"
#include "ippg/turnip/params.hpp"

namespace ippg::turnip {

/// Intermediate activations of one forward pass, consumed by backward().
template <class T>
struct ForwardCache {
  std::uint64_t params_version = 0;
  const void* params_identity = nullptr;
  int length = 0;         // unpadded T
  int padded_length = 0;  // multiple of the total downsample

  Mat<T> col_enc1, e1;  // e1 = relu(enc1), full resolution
  Mat<T> p1, col_enc2, e2;
  Mat<T> p2, col_enc3, e3;
  Mat<T> s1, s2;  // skip features [1x1 conv; gru hidden states]
  // GRU internals per resolution: gates r, z, n, hidden projection of n, states.
  struct GruTrace {
    Mat<T> r, z, n, hn, h;
  };
  GruTrace gru1, gru2;
  Mat<T> col_dec2, d2;
  Mat<T> col_dec1, d1;
  Vec<T> output;  // padded length
};

/// Converts a T x signals window to the network's signals x T layout.
template <class T>
Mat<T> to_network_input(const RegionSeries& window);

/// Runs the denoiser on one signals x T window and returns T output samples.
/// Sentinel entries are ordinary inputs. Throws ShapeMismatch.
template <class T>
Vec<T> forward(const Mat<T>& window, const ParamSet<T>& params, const TurnipConfig& config,
               ForwardCache<T>* cache = nullptr);

/// Gradients of a scalar objective with respect to every parameter given
/// d(objective)/d(output). Throws StaleCache when `params` changed since
/// the forward pass that filled `cache`.
template <class T>
ParamSet<T> backward(const ForwardCache<T>& cache, const ParamSet<T>& params,
                     const TurnipConfig& config, const Vec<T>& grad_output);

extern template Mat<float> to_network_input<float>(const RegionSeries&);
extern template Mat<double> to_network_input<double>(const RegionSeries&);
extern template Vec<float> forward<float>(const Mat<float>&, const ParamSet<float>&,
                                          const TurnipConfig&, ForwardCache<float>*);
extern template Vec<double> forward<double>(const Mat<double>&, const ParamSet<double>&,
                                            const TurnipConfig&, ForwardCache<double>*);
extern template ParamSet<float> backward<float>(const ForwardCache<float>&, const ParamSet<float>&,
                                                const TurnipConfig&, const Vec<float>&);
extern template ParamSet<double> backward<double>(const ForwardCache<double>&,
                                                  const ParamSet<double>&, const TurnipConfig&,
                                                  const Vec<double>&);

}  // namespace ippg::turnip
