#pragma once

#include "wmr/nn/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstring>
#include <vector>

namespace wmr::nn {

template <class Scalar>
using MatrixR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

// Grow-only scratch buffer for im2col bands.
template <class Scalar>
Eigen::Map<MatrixR<Scalar>> scratch(Eigen::Index rows, Eigen::Index cols) {
  thread_local std::vector<Scalar> buffer;
  if (buffer.size() < static_cast<std::size_t>(rows * cols)) buffer.resize(static_cast<std::size_t>(rows * cols));
  return {buffer.data(), rows, cols};
}

// Output rows per im2col band, chosen so a band stays near 32 MB.
inline int band_rows(Eigen::Index ckk, int h, int w, std::size_t scalar_size) {
  const std::size_t budget = std::size_t{32} << 20;
  const std::size_t per_row = static_cast<std::size_t>(ckk) * static_cast<std::size_t>(w) * scalar_size;
  return std::clamp(static_cast<int>(budget / std::max<std::size_t>(per_row, 1)), 1, h);
}

// Unrolls output rows [y0, y1) of sample `ni` into (c*k*k, (y1-y0)*w)
// patches with zero padding (k-1)/2.
template <class Scalar>
void im2col(const Tensor<Scalar>& in, int ni, int k, int y0, int y1, Eigen::Map<MatrixR<Scalar>>& col) {
  const int pad = (k - 1) / 2, h = in.h, w = in.w, rows = y1 - y0;
  for (int ci = 0; ci < in.c; ++ci) {
    const Scalar* src = in.plane(ni, ci);
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        Scalar* dst = col.data() + (Eigen::Index(ci) * k * k + ky * k + kx) * rows * w;
        const int x_lo = std::max(0, pad - kx), x_hi = std::min(w, w + pad - kx);
        for (int y = y0; y < y1; ++y) {
          Scalar* row = dst + Eigen::Index(y - y0) * w;
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h || x_lo >= x_hi) {
            std::fill(row, row + w, Scalar(0));
            continue;
          }
          std::fill(row, row + x_lo, Scalar(0));
          std::memcpy(row + x_lo, src + Eigen::Index(sy) * w + (x_lo + kx - pad),
                      sizeof(Scalar) * static_cast<std::size_t>(x_hi - x_lo));
          std::fill(row + x_hi, row + w, Scalar(0));
        }
      }
  }
}

// Adjoint of im2col: scatters patch gradients back onto sample `ni`.
template <class Scalar>
void col2im(const Eigen::Map<MatrixR<Scalar>>& col, int k, int y0, int y1, Tensor<Scalar>& out, int ni) {
  const int pad = (k - 1) / 2, h = out.h, w = out.w, rows = y1 - y0;
  for (int ci = 0; ci < out.c; ++ci) {
    Scalar* dst = out.plane(ni, ci);
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const Scalar* src = col.data() + (Eigen::Index(ci) * k * k + ky * k + kx) * rows * w;
        const int x_lo = std::max(0, pad - kx), x_hi = std::min(w, w + pad - kx);
        for (int y = y0; y < y1; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          const Scalar* row = src + Eigen::Index(y - y0) * w;
          Scalar* target = dst + Eigen::Index(sy) * w + (kx - pad);
          for (int x = x_lo; x < x_hi; ++x) target[x] += row[x];
        }
      }
  }
}

}  // namespace detail

/// Weights of one convolution: kernel (c_out, c_in, k, k) and bias (c_out).
template <class Scalar>
struct ConvLayer {
  Tensor<Scalar> kernel;
  Vector<Scalar> bias;

  int c_out() const { return kernel.n; }
  int c_in() const { return kernel.c; }
  int k() const { return kernel.h; }

  Eigen::Map<const MatrixR<Scalar>> matrix() const {
    return {kernel.data.data(), kernel.n, Eigen::Index(kernel.c) * kernel.h * kernel.w};
  }
};

template <class Scalar>
void check_conv(const Tensor<Scalar>& in, const ConvLayer<Scalar>& layer) {
  if (layer.kernel.h != layer.kernel.w || layer.kernel.h % 2 == 0)
    throw Error(ErrorKind::shape_error, "conv kernel must be square and odd-sized");
  if (in.c != layer.c_in())
    throw Error(ErrorKind::shape_error, "conv input has " + std::to_string(in.c) + " channels, kernel expects " +
                                            std::to_string(layer.c_in()));
  if (layer.bias.size() != layer.c_out()) throw Error(ErrorKind::shape_error, "conv bias size mismatch");
}

/// Stride-1 convolution with zero padding (k-1)/2; preserves h and w.
template <class Scalar>
Tensor<Scalar> conv2d_forward(const Tensor<Scalar>& in, const ConvLayer<Scalar>& layer) {
  check_conv(in, layer);
  const int k = layer.k();
  Tensor<Scalar> out(in.n, layer.c_out(), in.h, in.w);
  for (int ni = 0; ni < in.n; ++ni) {
    auto dst = out.sample(ni);
    if (k == 1) {
      dst.noalias() = layer.matrix() * in.sample(ni);
    } else {
      const Eigen::Index ckk = Eigen::Index(in.c) * k * k;
      const int band = detail::band_rows(ckk, in.h, in.w, sizeof(Scalar));
      for (int y0 = 0; y0 < in.h; y0 += band) {
        const int y1 = std::min(in.h, y0 + band);
        auto col = detail::scratch<Scalar>(ckk, Eigen::Index(y1 - y0) * in.w);
        detail::im2col(in, ni, k, y0, y1, col);
        dst.middleCols(Eigen::Index(y0) * in.w, col.cols()).noalias() = layer.matrix() * col;
      }
    }
    dst.colwise() += layer.bias;
  }
  return out;
}

template <class Scalar>
struct ConvGrads {
  Tensor<Scalar> input;  // empty when not requested
  Tensor<Scalar> kernel;
  Vector<Scalar> bias;
};

/// Gradients of a loss through conv2d_forward given dL/d(out).
template <class Scalar>
ConvGrads<Scalar> conv2d_backward(const Tensor<Scalar>& in, const ConvLayer<Scalar>& layer,
                                  const Tensor<Scalar>& grad_out, bool need_input = true) {
  check_conv(in, layer);
  if (grad_out.n != in.n || grad_out.c != layer.c_out() || grad_out.h != in.h || grad_out.w != in.w)
    throw Error(ErrorKind::shape_error, "conv gradient shape mismatch");
  const int k = layer.k();
  const Eigen::Index ckk = Eigen::Index(in.c) * k * k;
  ConvGrads<Scalar> g;
  g.kernel = Tensor<Scalar>(layer.kernel.n, layer.kernel.c, layer.kernel.h, layer.kernel.w);
  g.bias = Vector<Scalar>::Zero(layer.c_out());
  if (need_input) g.input = Tensor<Scalar>(in.n, in.c, in.h, in.w);
  Eigen::Map<MatrixR<Scalar>> gk(g.kernel.data.data(), layer.c_out(), ckk);

  for (int ni = 0; ni < in.n; ++ni) {
    const auto go = grad_out.sample(ni);
    g.bias += go.rowwise().sum();
    if (k == 1) {
      gk.noalias() += go * in.sample(ni).transpose();
      if (need_input) g.input.sample(ni).noalias() = layer.matrix().transpose() * go;
      continue;
    }
    const int band = detail::band_rows(ckk, in.h, in.w, sizeof(Scalar));
    for (int y0 = 0; y0 < in.h; y0 += band) {
      const int y1 = std::min(in.h, y0 + band);
      auto col = detail::scratch<Scalar>(ckk, Eigen::Index(y1 - y0) * in.w);
      const auto go_band = go.middleCols(Eigen::Index(y0) * in.w, col.cols());
      detail::im2col(in, ni, k, y0, y1, col);
      gk.noalias() += go_band * col.transpose();
      if (need_input) {
        col.noalias() = layer.matrix().transpose() * go_band;
        detail::col2im(col, k, y0, y1, g.input, ni);
      }
    }
  }
  return g;
}

template <class Scalar>
Tensor<Scalar> relu_forward(const Tensor<Scalar>& in) {
  Tensor<Scalar> out = in;
  out.data = in.data.cwiseMax(Scalar(0));
  return out;
}

/// Masks by in > 0.
template <class Scalar>
Tensor<Scalar> relu_backward(const Tensor<Scalar>& in, const Tensor<Scalar>& grad_out) {
  require_same_shape(in, grad_out, "relu_backward");
  Tensor<Scalar> g = grad_out;
  g.data = (in.data.array() > Scalar(0)).select(grad_out.data, Scalar(0));
  return g;
}

template <class Scalar>
struct PoolResult {
  Tensor<Scalar> out;
  Eigen::VectorXi argmax;  // flat input index per output element
};

/// 2x2 max pooling, stride 2. Ties resolve to the first element in row-major order.
template <class Scalar>
PoolResult<Scalar> maxpool2_forward(const Tensor<Scalar>& in) {
  if (in.h % 2 || in.w % 2) throw Error(ErrorKind::shape_error, "maxpool2 needs even height and width");
  PoolResult<Scalar> r;
  r.out = Tensor<Scalar>(in.n, in.c, in.h / 2, in.w / 2);
  r.argmax.resize(r.out.size());
  Eigen::Index o = 0;
  for (int ni = 0; ni < in.n; ++ni)
    for (int ci = 0; ci < in.c; ++ci) {
      const Scalar* src = in.plane(ni, ci);
      const Eigen::Index base = src - in.data.data();
      for (int y = 0; y < r.out.h; ++y)
        for (int x = 0; x < r.out.w; ++x, ++o) {
          Eigen::Index best = Eigen::Index(2 * y) * in.w + 2 * x;
          for (Eigen::Index cand : {best + 1, best + in.w, best + in.w + 1})
            if (src[cand] > src[best]) best = cand;
          r.out.data[o] = src[best];
          r.argmax[o] = static_cast<int>(base + best);
        }
    }
  return r;
}

template <class Scalar>
Tensor<Scalar> maxpool2_backward(const Tensor<Scalar>& in, const PoolResult<Scalar>& fwd,
                                 const Tensor<Scalar>& grad_out) {
  require_same_shape(fwd.out, grad_out, "maxpool2_backward");
  Tensor<Scalar> g(in.n, in.c, in.h, in.w);
  for (Eigen::Index o = 0; o < grad_out.size(); ++o) g.data[fwd.argmax[o]] += grad_out.data[o];
  return g;
}

template <class Scalar>
struct LossResult {
  Scalar loss = 0;
  Tensor<Scalar> grad;
};

/// Mean of squared differences; gradient 2 (pred - target) / count.
template <class Scalar>
LossResult<Scalar> mse_loss(const Tensor<Scalar>& pred, const Tensor<Scalar>& target) {
  require_same_shape(pred, target, "mse_loss");
  LossResult<Scalar> r;
  const Vector<Scalar> diff = pred.data - target.data;
  const Scalar count = static_cast<Scalar>(std::max<Eigen::Index>(1, diff.size()));
  r.loss = diff.squaredNorm() / count;
  r.grad = pred;
  r.grad.data = diff * (Scalar(2) / count);
  return r;
}

}  // namespace wmr::nn
