#pragma once

#include <Eigen/Core>

#include <array>
#include <string>

#include "wmr/error.hpp"

namespace wmr::nn {

/// Dense NCHW tensor. Plane (n, c) is a contiguous h*w row-major block.
template <class Scalar>
struct Tensor {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using PlaneMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstPlaneMap =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  int n = 0, c = 0, h = 0, w = 0;
  Vector data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_), data(Vector::Zero(size_of(n_, c_, h_, w_))) {}

  static Eigen::Index size_of(int n, int c, int h, int w) { return Eigen::Index(n) * c * h * w; }
  Eigen::Index size() const { return data.size(); }
  std::array<int, 4> shape() const { return {n, c, h, w}; }
  bool same_shape(const Tensor& o) const { return shape() == o.shape(); }

  Scalar* plane(int ni, int ci) { return data.data() + (Eigen::Index(ni) * c + ci) * h * w; }
  const Scalar* plane(int ni, int ci) const { return data.data() + (Eigen::Index(ni) * c + ci) * h * w; }

  /// Sample ni viewed as a (c, h*w) row-major matrix.
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sample(int ni) {
    return {plane(ni, 0), c, Eigen::Index(h) * w};
  }
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sample(int ni) const {
    return {plane(ni, 0), c, Eigen::Index(h) * w};
  }

  Scalar& at(int ni, int ci, int y, int x) { return plane(ni, ci)[Eigen::Index(y) * w + x]; }
  Scalar at(int ni, int ci, int y, int x) const { return plane(ni, ci)[Eigen::Index(y) * w + x]; }

  template <class Other>
  Tensor<Other> cast() const {
    Tensor<Other> out;
    out.n = n;
    out.c = c;
    out.h = h;
    out.w = w;
    out.data = data.template cast<Other>();
    return out;
  }
};

inline std::string shape_string(const std::array<int, 4>& s) {
  return "(" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) + "," +
         std::to_string(s[3]) + ")";
}

template <class Scalar>
void require_same_shape(const Tensor<Scalar>& a, const Tensor<Scalar>& b, const char* what) {
  if (!a.same_shape(b))
    throw Error(ErrorKind::shape_error,
                std::string(what) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

}  // namespace wmr::nn
