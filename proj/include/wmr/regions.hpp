#pragma once

#include "wmr/image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace wmr {

struct RegionProps {
  int label = 0;
  int area = 0;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();  // (x, y) pixel indices
  double semi_major = 0.0;  // a
  double semi_minor = 0.0;  // b
  Eigen::Vector2d major_axis = Eigen::Vector2d::UnitX();  // unit direction of a
};

/// 8-connected labeling of the nonzero pixels. Labels are 1-based in
/// raster order of each region's first pixel; 0 is background.
Plane<int> label_components(const ConfidenceMap& binary, int& count);

/// Area, centroid and semi-axes 2*sqrt(lambda) of the central second-moment
/// matrix for every 8-connected region. A disc of radius r gives a ~ b ~ r.
std::vector<RegionProps> region_analysis(const ConfidenceMap& binary);
std::vector<RegionProps> region_analysis(const Plane<int>& labels, int count);

/// Regions with a + b > min_axis_sum.
std::vector<RegionProps> accepted_regions(const std::vector<RegionProps>& props, double min_axis_sum);

/// Centroids of regions with a + b > min_axis_sum.
std::vector<Eigen::Vector2d> filter_regions(const std::vector<RegionProps>& props, double min_axis_sum);

/// Centroids of `regions`, cutting chains of touching bumps apart. A region
/// whose pixel extent along its major axis is e gets
/// k = 1 + max(0, round((e - single_extent) / pitch)) parts, found by 1-D
/// k-means on the pixel projections; each part contributes its centroid.
std::vector<Eigen::Vector2d> split_chains(const Plane<int>& labels, const std::vector<RegionProps>& regions,
                                          double pitch, double single_extent, std::uint64_t seed);

}  // namespace wmr
