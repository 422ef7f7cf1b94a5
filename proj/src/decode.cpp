#include "wmr/decode.hpp"

#include "wmr/kmeans.hpp"

#include <cmath>

namespace wmr {

namespace {

bool clustered_ok(const KMeans1D& km, double min_gap) {
  if (km.degenerate) return false;
  for (std::size_t c = 1; c < km.centers.size(); ++c)
    if (km.centers[c] - km.centers[c - 1] < min_gap) return false;
  return true;
}

BitMatrix fixed_grid(std::span<const Eigen::Vector2d> centroids, int m, double square_size,
                     const GridLayout& layout) {
  BitMatrix bits(m);
  const double half = 0.5 * registered_pitch(m, layout, square_size);
  for (const Eigen::Vector2d& c : centroids)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const Eigen::Vector2d cell = registered_cell_center(m, layout, i, j, square_size);
        if (std::abs(c.x() - cell.x()) < half && std::abs(c.y() - cell.y()) < half) bits.set(i, j, true);
      }
  return bits;
}

}  // namespace

DecodeResult decode_matrix(std::span<const Eigen::Vector2d> centroids, int m, double square_size,
                           const GridLayout& layout, std::uint64_t seed) {
  DecodeResult out;
  out.bits = BitMatrix(m);
  if (centroids.empty()) return out;

  const double min_gap = 0.5 * registered_pitch(m, layout, square_size);
  if (static_cast<int>(centroids.size()) >= m) {
    std::vector<double> xs, ys;
    for (const auto& c : centroids) {
      xs.push_back(c.x());
      ys.push_back(c.y());
    }
    const KMeans1D kx = kmeans_1d(xs, m, seed);
    const KMeans1D ky = kmeans_1d(ys, m, seed + 1);
    if (clustered_ok(kx, min_gap) && clustered_ok(ky, min_gap)) {
      for (std::size_t k = 0; k < centroids.size(); ++k) out.bits.set(ky.assignment[k], kx.assignment[k], true);
      out.x_centers = kx.centers;
      out.y_centers = ky.centers;
      return out;
    }
  }
  out.used_fallback = true;
  out.bits = fixed_grid(centroids, m, square_size, layout);
  return out;
}

std::vector<Eigen::Vector2d> within_grid(std::span<const Eigen::Vector2d> centroids, int m,
                                         double square_size, const GridLayout& layout) {
  const double half = 0.5 * registered_pitch(m, layout, square_size);
  const Eigen::Vector2d lo = registered_cell_center(m, layout, 0, 0, square_size).array() - half;
  const Eigen::Vector2d hi = registered_cell_center(m, layout, m - 1, m - 1, square_size).array() + half;
  std::vector<Eigen::Vector2d> out;
  for (const auto& c : centroids)
    if ((c.array() >= lo.array()).all() && (c.array() <= hi.array()).all()) out.push_back(c);
  return out;
}

}  // namespace wmr
