#include "ippg/turnip/network.hpp"

#include <cmath>

#include "ippg/error.hpp"

namespace ippg::turnip {

namespace {

template <class T>
Mat<T> im2col(const Mat<T>& x, int kernel) {
  const Eigen::Index c = x.rows();
  const Eigen::Index len = x.cols();
  const int half = kernel / 2;
  Mat<T> col = Mat<T>::Zero(c * kernel, len);
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index s = k - half;
    if (s >= len || -s >= len) continue;
    if (s >= 0) {
      col.block(k * c, 0, c, len - s) = x.block(0, s, c, len - s);
    } else {
      col.block(k * c, -s, c, len + s) = x.block(0, 0, c, len + s);
    }
  }
  return col;
}

template <class T>
Mat<T> col2im(const Mat<T>& dcol, Eigen::Index channels, int kernel) {
  const Eigen::Index len = dcol.cols();
  const int half = kernel / 2;
  Mat<T> dx = Mat<T>::Zero(channels, len);
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index s = k - half;
    if (s >= len || -s >= len) continue;
    if (s >= 0) {
      dx.block(0, s, channels, len - s) += dcol.block(k * channels, 0, channels, len - s);
    } else {
      dx.block(0, 0, channels, len + s) += dcol.block(k * channels, -s, channels, len + s);
    }
  }
  return dx;
}

template <class T>
Mat<T> affine(const Mat<T>& w, const Mat<T>& b, const Mat<T>& x) {
  Mat<T> y = w * x;
  y.colwise() += b.col(0);
  return y;
}

template <class T>
Mat<T> relu(Mat<T> x) {
  return x.cwiseMax(T(0));
}

template <class T>
Mat<T> relu_grad(const Mat<T>& activated, const Mat<T>& grad) {
  return (activated.array() > T(0)).select(grad, T(0));
}

template <class T>
Mat<T> avg_pool(const Mat<T>& x, int factor) {
  const Eigen::Index out_len = x.cols() / factor;
  Mat<T> y = Mat<T>::Zero(x.rows(), out_len);
  for (Eigen::Index j = 0; j < out_len; ++j) {
    for (int u = 0; u < factor; ++u) y.col(j) += x.col(j * factor + u);
  }
  return y / T(factor);
}

template <class T>
Mat<T> avg_pool_grad(const Mat<T>& dy, int factor) {
  Mat<T> dx(dy.rows(), dy.cols() * factor);
  for (Eigen::Index j = 0; j < dy.cols(); ++j) {
    for (int u = 0; u < factor; ++u) dx.col(j * factor + u) = dy.col(j) / T(factor);
  }
  return dx;
}

template <class T>
Mat<T> upsample(const Mat<T>& x, int factor) {
  Mat<T> y(x.rows(), x.cols() * factor);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (int u = 0; u < factor; ++u) y.col(j * factor + u) = x.col(j);
  }
  return y;
}

template <class T>
Mat<T> upsample_grad(const Mat<T>& dy, int factor) {
  Mat<T> dx = Mat<T>::Zero(dy.rows(), dy.cols() / factor);
  for (Eigen::Index j = 0; j < dx.cols(); ++j) {
    for (int u = 0; u < factor; ++u) dx.col(j) += dy.col(j * factor + u);
  }
  return dx;
}

template <class T>
Mat<T> vstack(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

template <class T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

// Gate layout in the stacked matrices: reset, update, candidate.
template <class T>
typename ForwardCache<T>::GruTrace gru_forward(const Mat<T>& x, const ParamSet<T>& p,
                                                const std::string& prefix) {
  const Mat<T>& w_ih = p[prefix + ".w_ih"];
  const Mat<T>& w_hh = p[prefix + ".w_hh"];
  const Mat<T>& b_ih = p[prefix + ".b_ih"];
  const Mat<T>& b_hh = p[prefix + ".b_hh"];
  const Eigen::Index hidden = w_hh.cols();
  const Eigen::Index len = x.cols();

  const Mat<T> gi = affine(w_ih, b_ih, x);
  typename ForwardCache<T>::GruTrace tr{Mat<T>(hidden, len), Mat<T>(hidden, len),
                                        Mat<T>(hidden, len), Mat<T>(hidden, len),
                                        Mat<T>(hidden, len)};
  Vec<T> h = Vec<T>::Zero(hidden);
  Vec<T> gh(3 * hidden);
  for (Eigen::Index t = 0; t < len; ++t) {
    gh.noalias() = w_hh * h;
    gh += b_hh.col(0);
    for (Eigen::Index i = 0; i < hidden; ++i) {
      const T r = sigmoid(gi(i, t) + gh(i));
      const T z = sigmoid(gi(hidden + i, t) + gh(hidden + i));
      const T hn = gh(2 * hidden + i);
      const T n = std::tanh(gi(2 * hidden + i, t) + r * hn);
      tr.r(i, t) = r;
      tr.z(i, t) = z;
      tr.hn(i, t) = hn;
      tr.n(i, t) = n;
      tr.h(i, t) = (T(1) - z) * n + z * h(i);
    }
    h = tr.h.col(t);
  }
  return tr;
}

// Accumulates parameter gradients into `grads`; returns d(loss)/d(input).
template <class T>
Mat<T> gru_backward(const Mat<T>& x, const typename ForwardCache<T>::GruTrace& tr,
                    const Mat<T>& dh_out, const ParamSet<T>& p, ParamSet<T>& grads,
                    const std::string& prefix) {
  const Mat<T>& w_ih = p[prefix + ".w_ih"];
  const Mat<T>& w_hh = p[prefix + ".w_hh"];
  const Eigen::Index hidden = w_hh.cols();
  const Eigen::Index len = x.cols();

  Mat<T> dgi(3 * hidden, len);
  Mat<T> dgh(3 * hidden, len);
  Vec<T> dh_next = Vec<T>::Zero(hidden);
  Vec<T> dh(hidden);
  for (Eigen::Index t = len - 1; t >= 0; --t) {
    dh = dh_out.col(t) + dh_next;
    for (Eigen::Index i = 0; i < hidden; ++i) {
      const T r = tr.r(i, t), z = tr.z(i, t), n = tr.n(i, t), hn = tr.hn(i, t);
      const T h_prev = t > 0 ? tr.h(i, t - 1) : T(0);
      const T dn_pre = dh(i) * (T(1) - z) * (T(1) - n * n);
      const T dz_pre = dh(i) * (h_prev - n) * z * (T(1) - z);
      const T dr_pre = dn_pre * hn * r * (T(1) - r);
      dgi(i, t) = dr_pre;
      dgi(hidden + i, t) = dz_pre;
      dgi(2 * hidden + i, t) = dn_pre;
      dgh(i, t) = dr_pre;
      dgh(hidden + i, t) = dz_pre;
      dgh(2 * hidden + i, t) = dn_pre * r;
      dh_next(i) = dh(i) * z;
    }
    dh_next.noalias() += w_hh.transpose() * dgh.col(t);
  }

  Mat<T> h_prev = Mat<T>::Zero(hidden, len);
  if (len > 1) h_prev.rightCols(len - 1) = tr.h.leftCols(len - 1);
  grads[prefix + ".w_hh"].noalias() += dgh * h_prev.transpose();
  grads[prefix + ".b_hh"] += dgh.rowwise().sum();
  grads[prefix + ".w_ih"].noalias() += dgi * x.transpose();
  grads[prefix + ".b_ih"] += dgi.rowwise().sum();
  return w_ih.transpose() * dgi;
}

// Gradient of an affine layer y = W col + b; returns d/d(col).
template <class T>
Mat<T> affine_backward(const Mat<T>& col, const Mat<T>& dy, const ParamSet<T>& p,
                       ParamSet<T>& grads, const std::string& name) {
  grads[name + ".weight"].noalias() += dy * col.transpose();
  grads[name + ".bias"] += dy.rowwise().sum();
  return p[name + ".weight"].transpose() * dy;
}

}  // namespace

template <class T>
Mat<T> to_network_input(const RegionSeries& window) {
  const auto signals = static_cast<Eigen::Index>(window.signal_count());
  const auto len = static_cast<Eigen::Index>(window.frames);
  Mat<T> x(signals, len);
  for (Eigen::Index t = 0; t < len; ++t) {
    for (Eigen::Index i = 0; i < signals; ++i) {
      x(i, t) = static_cast<T>(window.signal(static_cast<std::size_t>(t), static_cast<std::size_t>(i)));
    }
  }
  return x;
}

template <class T>
Vec<T> forward(const Mat<T>& window, const ParamSet<T>& params, const TurnipConfig& config,
               ForwardCache<T>* cache) {
  if (window.rows() != config.input_channels || window.cols() != config.window_length) {
    throw Error(ErrorCode::ShapeMismatch,
                "expected " + std::to_string(config.input_channels) + " x " +
                    std::to_string(config.window_length) + " window, got " +
                    std::to_string(window.rows()) + " x " + std::to_string(window.cols()));
  }
  const int len = config.window_length;
  const int padded = config.padded_length();
  const int k = config.kernel_size;
  const auto [f1, f2] = config.downsample_factors;

  ForwardCache<T> local;
  ForwardCache<T>& c = cache ? *cache : local;
  c.params_version = params.version();
  c.params_identity = &params;
  c.length = len;
  c.padded_length = padded;

  Mat<T> x(window.rows(), padded);
  x.leftCols(len) = window;
  for (int j = 0; j < padded - len; ++j) x.col(len + j) = window.col(len - 2 - j);

  c.col_enc1 = im2col(x, k);
  c.e1 = relu(affine(params["enc1.weight"], params["enc1.bias"], c.col_enc1));
  c.p1 = avg_pool(c.e1, f1);
  c.col_enc2 = im2col(c.p1, k);
  c.e2 = relu(affine(params["enc2.weight"], params["enc2.bias"], c.col_enc2));
  c.p2 = avg_pool(c.e2, f2);
  c.col_enc3 = im2col(c.p2, k);
  c.e3 = relu(affine(params["enc3.weight"], params["enc3.bias"], c.col_enc3));

  c.s1 = affine(params["skip1.conv.weight"], params["skip1.conv.bias"], c.e1);
  c.s2 = affine(params["skip2.conv.weight"], params["skip2.conv.bias"], c.e2);
  if (config.use_gru) {
    c.gru1 = gru_forward(c.e1, params, "skip1.gru");
    c.gru2 = gru_forward(c.e2, params, "skip2.gru");
    c.s1 = vstack(c.s1, c.gru1.h);
    c.s2 = vstack(c.s2, c.gru2.h);
  }

  c.col_dec2 = im2col(vstack(upsample(c.e3, f2), c.s2), k);
  c.d2 = relu(affine(params["dec2.weight"], params["dec2.bias"], c.col_dec2));
  c.col_dec1 = im2col(vstack(upsample(c.d2, f1), c.s1), k);
  c.d1 = relu(affine(params["dec1.weight"], params["dec1.bias"], c.col_dec1));
  c.output = affine(params["out.weight"], params["out.bias"], c.d1).row(0).transpose();
  return c.output.head(len);
}

template <class T>
ParamSet<T> backward(const ForwardCache<T>& c, const ParamSet<T>& params,
                     const TurnipConfig& config, const Vec<T>& grad_output) {
  if (c.params_identity != &params || c.params_version != params.version()) {
    throw Error(ErrorCode::StaleCache, "parameters changed since the forward pass");
  }
  if (grad_output.size() != c.length) {
    throw Error(ErrorCode::ShapeMismatch, "output gradient length does not match the window");
  }
  const int k = config.kernel_size;
  const auto [f1, f2] = config.downsample_factors;
  const auto [c1, c2, c3] = config.stage_channels;
  ParamSet<T> g = params.zeros_like();

  Mat<T> dy = Mat<T>::Zero(1, c.padded_length);
  dy.row(0).head(c.length) = grad_output.transpose();

  // Decoder.
  Mat<T> dd1 = affine_backward(c.d1, dy, params, g, "out");
  Mat<T> dcat1 = col2im(affine_backward(c.col_dec1, relu_grad(c.d1, dd1), params, g, "dec1"),
                        c2 + c.s1.rows(), k);
  Mat<T> dd2 = upsample_grad(Mat<T>(dcat1.topRows(c2)), f1);
  const Mat<T> ds1 = dcat1.bottomRows(c.s1.rows());
  Mat<T> dcat2 = col2im(affine_backward(c.col_dec2, relu_grad(c.d2, dd2), params, g, "dec2"),
                        c3 + c.s2.rows(), k);
  const Mat<T> de3 = upsample_grad(Mat<T>(dcat2.topRows(c3)), f2);
  const Mat<T> ds2 = dcat2.bottomRows(c.s2.rows());

  // Bottleneck and stage 2.
  Mat<T> dp2 = col2im(affine_backward(c.col_enc3, relu_grad(c.e3, de3), params, g, "enc3"),
                      c2, k);
  Mat<T> de2 = avg_pool_grad(dp2, f2);
  de2 += affine_backward(c.e2, Mat<T>(ds2.topRows(c2)), params, g, "skip2.conv");
  if (config.use_gru) {
    de2 += gru_backward(c.e2, c.gru2, Mat<T>(ds2.bottomRows(ds2.rows() - c2)), params, g,
                        "skip2.gru");
  }

  // Stage 1.
  Mat<T> dp1 = col2im(affine_backward(c.col_enc2, relu_grad(c.e2, de2), params, g, "enc2"),
                      c1, k);
  Mat<T> de1 = avg_pool_grad(dp1, f1);
  de1 += affine_backward(c.e1, Mat<T>(ds1.topRows(c1)), params, g, "skip1.conv");
  if (config.use_gru) {
    de1 += gru_backward(c.e1, c.gru1, Mat<T>(ds1.bottomRows(ds1.rows() - c1)), params, g,
                        "skip1.gru");
  }
  affine_backward(c.col_enc1, relu_grad(c.e1, de1), params, g, "enc1");
  return g;
}

template Mat<float> to_network_input<float>(const RegionSeries&);
template Mat<double> to_network_input<double>(const RegionSeries&);
template Vec<float> forward<float>(const Mat<float>&, const ParamSet<float>&, const TurnipConfig&,
                                   ForwardCache<float>*);
template Vec<double> forward<double>(const Mat<double>&, const ParamSet<double>&,
                                     const TurnipConfig&, ForwardCache<double>*);
template ParamSet<float> backward<float>(const ForwardCache<float>&, const ParamSet<float>&,
                                         const TurnipConfig&, const Vec<float>&);
template ParamSet<double> backward<double>(const ForwardCache<double>&, const ParamSet<double>&,
                                           const TurnipConfig&, const Vec<double>&);

}  // namespace ippg::turnip
