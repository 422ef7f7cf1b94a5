#pragma once

#include "wmr/image.hpp"
#include "wmr/nn/adam.hpp"
#include "wmr/nn/layers.hpp"
#include "wmr/random.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace wmr::nn {

/// Kernel sizes and output channels of the five convolutions.
struct Architecture {
  std::array<int, 5> kernels{9, 7, 7, 7, 1};
  std::array<int, 5> channels{48, 96, 48, 24, 1};
  int input_channels = 3;

  static Architecture cnn3dw() { return {}; }
  bool operator==(const Architecture&) const = default;
};

template <class Scalar>
struct Network {
  std::vector<ConvLayer<Scalar>> convs;

  Architecture architecture() const {
    Architecture a;
    if (convs.size() != 5) throw Error(ErrorKind::shape_error, "network must have 5 convolutions");
    a.input_channels = convs[0].c_in();
    for (int i = 0; i < 5; ++i) {
      a.kernels[i] = convs[i].k();
      a.channels[i] = convs[i].c_out();
    }
    return a;
  }

  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*> parameters() {
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*> out;
    for (auto& c : convs) {
      out.push_back(&c.kernel.data);
      out.push_back(&c.bias);
    }
    return out;
  }
  std::vector<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*> parameters() const {
    std::vector<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*> out;
    for (const auto& c : convs) {
      out.push_back(&c.kernel.data);
      out.push_back(&c.bias);
    }
    return out;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto* p : parameters()) n += p->size();
    return n;
  }

  template <class Other>
  Network<Other> cast() const {
    Network<Other> out;
    for (const auto& c : convs) out.convs.push_back({c.kernel.template cast<Other>(), c.bias.template cast<Other>()});
    return out;
  }
};

using NetworkWeights = Network<float>;
using OptimizerState = AdamState<float>;

/// Checks channel chaining, odd kernels and finite values.
template <class Scalar>
void validate_network(const Network<Scalar>& net) {
  const Architecture a = net.architecture();
  int c_in = a.input_channels;
  for (std::size_t i = 0; i < net.convs.size(); ++i) {
    const auto& c = net.convs[i];
    if (c.c_in() != c_in || c.kernel.h != c.kernel.w || c.k() % 2 == 0 || c.bias.size() != c.c_out())
      throw Error(ErrorKind::shape_error, "convolution " + std::to_string(i) + " has inconsistent shape");
    if (!c.kernel.data.allFinite() || !c.bias.allFinite())
      throw Error(ErrorKind::numeric_error, "convolution " + std::to_string(i) + " has non-finite weights");
    c_in = c.c_out();
  }
  if (c_in != 1) throw Error(ErrorKind::shape_error, "network must end with one channel");
}

template <class Scalar>
Network<Scalar> zero_network(const Architecture& arch = {}) {
  Network<Scalar> net;
  int c_in = arch.input_channels;
  for (int i = 0; i < 5; ++i) {
    const int k = arch.kernels[i];
    net.convs.push_back({Tensor<Scalar>(arch.channels[i], c_in, k, k), Vector<Scalar>::Zero(arch.channels[i])});
    c_in = arch.channels[i];
  }
  validate_network(net);
  return net;
}

/// He-normal kernels (std sqrt(2 / fan_in)), zero biases.
template <class Scalar>
Network<Scalar> init_network(std::uint64_t seed, const Architecture& arch = {}) {
  Network<Scalar> net = zero_network<Scalar>(arch);
  Rng rng(derive_seed(seed, 0x1417));
  for (auto& c : net.convs) {
    const double sd = std::sqrt(2.0 / (double(c.c_in()) * c.k() * c.k()));
    for (Eigen::Index i = 0; i < c.kernel.size(); ++i) c.kernel.data[i] = static_cast<Scalar>(sd * rng.normal());
  }
  return net;
}

/// Intermediate activations kept for the backward pass.
template <class Scalar>
struct ForwardCache {
  Tensor<Scalar> input;
  std::array<Tensor<Scalar>, 5> pre;   // convolution outputs
  std::array<Tensor<Scalar>, 4> post;  // after ReLU
  std::array<PoolResult<Scalar>, 2> pool;
};

/// conv9-relu-pool, conv7-relu-pool, conv7-relu, conv7-relu, conv1.
/// Returns the unclamped (n, 1, h/4, w/4) output.
template <class Scalar>
Tensor<Scalar> network_forward(const Network<Scalar>& net, const Tensor<Scalar>& x,
                               ForwardCache<Scalar>* cache = nullptr) {
  if (net.convs.size() != 5) throw Error(ErrorKind::shape_error, "network must have 5 convolutions");
  if (x.h % 4 || x.w % 4)
    throw Error(ErrorKind::shape_error,
                "input " + std::to_string(x.h) + "x" + std::to_string(x.w) + " is not divisible by 4");
  ForwardCache<Scalar> local;
  ForwardCache<Scalar>& c = cache ? *cache : local;
  if (cache) c.input = x;
  const Tensor<Scalar>* cur = &x;
  Tensor<Scalar> pooled;
  for (int i = 0; i < 5; ++i) {
    Tensor<Scalar> z = conv2d_forward(*cur, net.convs[i]);
    if (i == 4) return z;
    Tensor<Scalar> a = relu_forward(z);
    if (cache) c.pre[i] = std::move(z);
    if (i < 2) {
      auto p = maxpool2_forward(a);
      pooled = std::move(p.out);
      if (cache) {
        c.post[i] = std::move(a);
        c.pool[i].argmax = std::move(p.argmax);
        c.pool[i].out = pooled;
      }
      cur = &pooled;
    } else {
      c.post[i] = std::move(a);
      cur = &c.post[i];
    }
  }
  return {};
}

/// Gradients of a loss with respect to every parameter, given dL/d(output).
/// The input gradient is computed only when `grad_input` is non-null.
template <class Scalar>
Network<Scalar> network_backward(const Network<Scalar>& net, const ForwardCache<Scalar>& cache,
                                 const Tensor<Scalar>& grad_out, Tensor<Scalar>* grad_input = nullptr) {
  Network<Scalar> grads;
  grads.convs.resize(5);
  Tensor<Scalar> g = grad_out;
  for (int i = 4; i >= 0; --i) {
    const Tensor<Scalar>& in = i == 0 ? cache.input : (i <= 2 ? cache.pool[i - 1].out : cache.post[i - 1]);
    const bool need_input = i > 0 || grad_input;
    ConvGrads<Scalar> cg = conv2d_backward(in, net.convs[i], g, need_input);
    grads.convs[i] = {std::move(cg.kernel), std::move(cg.bias)};
    if (i == 0) {
      if (grad_input) *grad_input = std::move(cg.input);
      break;
    }
    g = std::move(cg.input);
    if (i <= 2) g = maxpool2_backward(cache.post[i - 1], cache.pool[i - 1], g);
    g = relu_backward(cache.pre[i - 1], g);
  }
  return grads;
}

Tensor<float> image_to_tensor(const ImageBuffer& img);
Tensor<float> images_to_tensor(const std::vector<const ImageBuffer*>& imgs);
ConfidenceMap tensor_to_map(const Tensor<float>& t, int ni = 0);

/// Network map for one image, clamped to [0, 1], at (h/4, w/4).
ConfidenceMap forward_cnn3dw(const ImageBuffer& img, const NetworkWeights& weights);

void write_weights(const std::filesystem::path& path, const NetworkWeights& weights);
NetworkWeights read_weights(const std::filesystem::path& path);

}  // namespace wmr::nn
