#pragma once

#include "wmr/image.hpp"

#include <cstdint>
#include <utility>

namespace wmr {

/// v' = clamp(contrast * (v - 0.5) + 0.5 + brightness, 0, 1) per channel.
/// brightness in [-0.5, 0.5], contrast in [0.5, 2].
ImageBuffer augment_photometric(const ImageBuffer& img, double brightness, double contrast);

struct CropWindow {
  int y = 0;
  int x = 0;
  int size = 0;
};

/// Window drawn uniformly over all valid offsets for a seed.
CropWindow crop_window(int height, int width, int size, std::uint64_t seed);

ImageBuffer crop(const ImageBuffer& img, const CropWindow& window);
ConfidenceMap crop(const ConfidenceMap& map, const CropWindow& window);

std::pair<ImageBuffer, ConfidenceMap> random_crop_pair(const ImageBuffer& img, const ConfidenceMap& gt,
                                                       int size, std::uint64_t seed);

}  // namespace wmr
