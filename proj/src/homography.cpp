#include "wmr/homography.hpp"

#include "wmr/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace wmr {

namespace {

bool has_collinear_triple(const Quad& q) {
  double scale = 0.0;
  for (const auto& a : q)
    for (const auto& b : q) scale = std::max(scale, (a - b).norm());
  if (scale <= 0.0) return true;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) {
        const Eigen::Vector2d u = q[j] - q[i], v = q[k] - q[i];
        const double area2 = std::abs(u.x() * v.y() - u.y() * v.x());
        if (area2 <= 1e-9 * scale * scale) return true;
      }
  return false;
}

// Similarity taking the points to zero mean and mean distance sqrt(2).
Eigen::Matrix3d normalizer(const Quad& q) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : q) mean += p;
  mean /= 4.0;
  double dist = 0.0;
  for (const auto& p : q) dist += (p - mean).norm();
  const double s = std::sqrt(2.0) / (dist / 4.0);
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

}  // namespace

Homography estimate_homography(const Quad& src, const Quad& dst) {
  if (has_collinear_triple(src) || has_collinear_triple(dst))
    throw Error(ErrorKind::degenerate_configuration, "three collinear points in a quad");

  const Eigen::Matrix3d ts = normalizer(src), td = normalizer(dst);
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d s = (ts * src[i].homogeneous()).hnormalized();
    const Eigen::Vector2d d = (td * dst[i].homogeneous()).hnormalized();
    a.row(2 * i) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y();
    a.row(2 * i + 1) << 0, 0, 0, s.x(), s.y(), 1, -d.y() * s.x(), -d.y() * s.y();
    b(2 * i) = d.x();
    b(2 * i + 1) = d.y();
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorKind::degenerate_configuration, "singular homography system");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);

  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  Homography out;
  out.matrix = td.inverse() * hn * ts;
  out.normalize();
  if (std::abs(out.matrix.determinant()) <= 1e-12)
    throw Error(ErrorKind::degenerate_configuration, "homography is not invertible");
  return out;
}

ConfidenceMap warp_map(const ConfidenceMap& map, const Homography& h, int size) {
  const Homography inv = h.inverse();
  ConfidenceMap out(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const Eigen::Vector3d q = inv.matrix * Eigen::Vector3d(x, y, 1.0);
      out(y, x) = q.z() > 0.0 || q.z() < 0.0 ? sample_bilinear(map, q.x() / q.z(), q.y() / q.z()) : 0.0f;
    }
  return out;
}

}  // namespace wmr
