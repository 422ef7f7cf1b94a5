#pragma once

#include "wmr/watermark.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace wmr {

struct DecodeResult {
  BitMatrix bits;
  bool used_fallback = false;  // fixed-grid assignment instead of clustering
  std::vector<double> x_centers;
  std::vector<double> y_centers;
};

/// Turns accepted centroids in the registered square (side `square_size`)
/// into an m x m matrix: x and y coordinates are clustered separately with
/// k = m, the ranked clusters give the column and row. When either axis
/// cannot produce m distinct clusters (too few points, an empty cluster, or
/// two centers closer than half a cell), every entry whose nominal cell
/// center has a centroid within half a pitch is set instead.
DecodeResult decode_matrix(std::span<const Eigen::Vector2d> centroids, int m, double square_size,
                           const GridLayout& layout, std::uint64_t seed);

/// Drops centroids lying more than half a pitch outside the nominal grid.
std::vector<Eigen::Vector2d> within_grid(std::span<const Eigen::Vector2d> centroids, int m,
                                         double square_size, const GridLayout& layout);

}  // namespace wmr
