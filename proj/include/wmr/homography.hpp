#pragma once

#include "wmr/image.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace wmr {

/// Planar projective map, scaled so that H(2,2) = 1 whenever it is nonzero.
template <class Scalar>
struct BasicHomography {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

  Mat3 matrix = Mat3::Identity();

  Vec2 apply(const Vec2& p) const {
    const Eigen::Matrix<Scalar, 3, 1> q = matrix * p.homogeneous();
    return q.hnormalized();
  }

  BasicHomography inverse() const {
    BasicHomography out;
    out.matrix = matrix.inverse();
    out.normalize();
    return out;
  }

  void normalize() {
    if (matrix(2, 2) != Scalar(0)) matrix /= matrix(2, 2);
  }
};

using Homography = BasicHomography<double>;
using Quad = std::array<Eigen::Vector2d, 4>;

/// Exact four-point solve of H * src_i ~ dst_i (8x8 linear system on
/// Hartley-normalized coordinates). Throws degenerate-configuration when three
/// points of either quad are collinear.
Homography estimate_homography(const Quad& src, const Quad& dst);

/// Inverse-mapped bilinear warp into a size x size square; samples falling
/// outside the source are 0. Pixel coordinates refer to pixel centers.
ConfidenceMap warp_map(const ConfidenceMap& map, const Homography& h, int size);

}  // namespace wmr
