#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <filesystem>

namespace wmr {

/// Single-channel row-major raster indexed (y, x).
template <class Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Bump-probability map. Ground-truth maps hold exactly {0, 1}.
using ConfidenceMap = Plane<float>;

/// Row-major RGB raster. `alpha` is 1 where geometry was hit and 0 where the
/// pixel is background waiting to be composited.
struct ImageBuffer {
  using Pixels = Eigen::Array<float, Eigen::Dynamic, 3, Eigen::RowMajor>;

  int height = 0;
  int width = 0;
  Pixels pixels;
  Plane<float> alpha;

  ImageBuffer() = default;
  ImageBuffer(int h, int w)
      : height(h), width(w), pixels(Pixels::Zero(Eigen::Index(h) * w, 3)),
        alpha(Plane<float>::Ones(h, w)) {}

  auto pixel(int y, int x) { return pixels.row(Eigen::Index(y) * width + x); }
  auto pixel(int y, int x) const { return pixels.row(Eigen::Index(y) * width + x); }

  Plane<float> channel(int c) const;
};

// 8-bit binary PPM (P6) / PGM (P5). Values are quantized with round-half-up
// after clamping to [0, 1]; reading back a written file is bit-exact.
void write_ppm(const std::filesystem::path& path, const ImageBuffer& img);
ImageBuffer read_ppm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const ConfidenceMap& map);
ConfidenceMap read_pgm(const std::filesystem::path& path);

std::uint8_t quantize(float v);

/// Mean over non-overlapping factor x factor blocks. Dimensions must divide.
ConfidenceMap average_pool(const ConfidenceMap& map, int factor);

/// Bilinear resample to (height, width) with pixel-center alignment.
ConfidenceMap resize_bilinear(const ConfidenceMap& map, int height, int width);

/// Bilinear lookup at continuous pixel coordinates; 0 outside the raster.
template <class Scalar>
Scalar sample_bilinear(const Plane<Scalar>& map, double x, double y) {
  const Eigen::Index h = map.rows(), w = map.cols();
  if (!(x >= 0.0 && y >= 0.0 && x <= double(w - 1) && y <= double(h - 1))) return Scalar(0);
  const Eigen::Index x0 = static_cast<Eigen::Index>(x), y0 = static_cast<Eigen::Index>(y);
  const Eigen::Index x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - double(x0), fy = y - double(y0);
  const double top = (1 - fx) * map(y0, x0) + fx * map(y0, x1);
  const double bottom = (1 - fx) * map(y1, x0) + fx * map(y1, x1);
  return static_cast<Scalar>((1 - fy) * top + fy * bottom);
}

}  // namespace wmr
