#include "wmr/augment.hpp"

#include "wmr/error.hpp"
#include "wmr/random.hpp"

namespace wmr {

ImageBuffer augment_photometric(const ImageBuffer& img, double brightness, double contrast) {
  if (!(brightness >= -0.5 && brightness <= 0.5))
    throw Error(ErrorKind::invalid_argument, "brightness outside [-0.5, 0.5]");
  if (!(contrast >= 0.5 && contrast <= 2.0))
    throw Error(ErrorKind::invalid_argument, "contrast outside [0.5, 2]");
  ImageBuffer out = img;
  const float c = static_cast<float>(contrast), b = static_cast<float>(brightness);
  out.pixels = (c * (img.pixels - 0.5f) + 0.5f + b).max(0.0f).min(1.0f);
  return out;
}

CropWindow crop_window(int height, int width, int size, std::uint64_t seed) {
  if (size < 1 || size > height || size > width)
    throw Error(ErrorKind::invalid_argument, "crop size exceeds the image");
  Rng rng(derive_seed(seed, 0xc0));
  CropWindow w;
  w.size = size;
  w.y = rng.below(height - size + 1);
  w.x = rng.below(width - size + 1);
  return w;
}

ImageBuffer crop(const ImageBuffer& img, const CropWindow& window) {
  ImageBuffer out(window.size, window.size);
  for (int y = 0; y < window.size; ++y)
    for (int x = 0; x < window.size; ++x) {
      out.pixel(y, x) = img.pixel(window.y + y, window.x + x);
      out.alpha(y, x) = img.alpha(window.y + y, window.x + x);
    }
  return out;
}

ConfidenceMap crop(const ConfidenceMap& map, const CropWindow& window) {
  return map.block(window.y, window.x, window.size, window.size);
}

std::pair<ImageBuffer, ConfidenceMap> random_crop_pair(const ImageBuffer& img, const ConfidenceMap& gt,
                                                       int size, std::uint64_t seed) {
  if (gt.rows() != img.height || gt.cols() != img.width)
    throw Error(ErrorKind::invalid_argument, "image and ground truth differ in size");
  const CropWindow w = crop_window(img.height, img.width, size, seed);
  return {crop(img, w), crop(gt, w)};
}

}  // namespace wmr
