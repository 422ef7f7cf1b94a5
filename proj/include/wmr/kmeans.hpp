#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wmr {

struct KMeans1D {
  std::vector<double> centers;  // ascending
  std::vector<int> assignment;  // index into centers, per input value
  double inertia = 0.0;         // sum of squared distances
  bool degenerate = false;      // some cluster ended up empty
};

/// Lloyd's algorithm on scalars from k-means++ seeding, iterated to an
/// assignment fixpoint (at most 100 rounds). The best of `restarts` seeded
/// runs by inertia is returned. Throws insufficient-points when
/// values.size() < k.
KMeans1D kmeans_1d(std::span<const double> values, int k, std::uint64_t seed, int restarts = 8);

}  // namespace wmr
