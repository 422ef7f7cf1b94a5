#pragma once

#include "wmr/image.hpp"

#include <array>
#include <cstdint>

namespace wmr {

inline constexpr int kOtsuBins = 256;

/// Bin index of a value on [0, 1]; out-of-range values are clamped.
int otsu_bin(float v);

std::array<std::int64_t, kOtsuBins> histogram256(const ConfidenceMap& map);

struct OtsuResult {
  double threshold = 0.0;   // center of the last bin of the lower class
  int bin = 0;
  bool degenerate = false;  // fewer than two occupied bins
};

/// Otsu's threshold on a 256-bin histogram. A histogram with a single
/// occupied bin is degenerate; the map mean is returned (the constant itself
/// for a constant map) and callers treat the map as free of detections.
OtsuResult otsu_threshold(const ConfidenceMap& map);

/// 1 where map > beta * thre, else 0.
ConfidenceMap binarize(const ConfidenceMap& map, double beta, double thre);

}  // namespace wmr
