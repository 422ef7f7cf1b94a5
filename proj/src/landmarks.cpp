#include "wmr/landmarks.hpp"

#include "wmr/error.hpp"
#include "wmr/regions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace wmr {

namespace {

constexpr std::array<double, 4> kLandmarkHue{0.0, 120.0, 240.0, 60.0};

double hue_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

}  // namespace

double hue_deg(float r, float g, float b) {
  const float mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const float c = mx - mn;
  if (c <= 0.0f) return 0.0;
  double h;
  if (mx == r)
    h = std::fmod((g - b) / c, 6.0f);
  else if (mx == g)
    h = (b - r) / c + 2.0;
  else
    h = (r - g) / c + 4.0;
  h *= 60.0;
  return h < 0.0 ? h + 360.0 : h;
}

ConfidenceMap landmark_mask(const ImageBuffer& img, int color_id, const LandmarkTolerance& tol) {
  ConfidenceMap mask = ConfidenceMap::Zero(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto p = img.pixel(y, x);
      const float mx = p.maxCoeff(), mn = p.minCoeff();
      const float chroma = mx - mn;
      if (chroma < tol.min_chroma || chroma < tol.min_saturation * mx) continue;
      if (hue_distance(hue_deg(p(0), p(1), p(2)), kLandmarkHue[color_id]) <= tol.hue_deg) mask(y, x) = 1.0f;
    }
  return mask;
}

Quad detect_landmarks(const ImageBuffer& img, const LandmarkTolerance& tol) {
  Quad out;
  for (int id = 0; id < 4; ++id) {
    auto regions = region_analysis(landmark_mask(img, id, tol));
    if (regions.empty())
      throw LandmarkError(ErrorKind::landmark_not_found, id, "landmark " + std::to_string(id) + " not found");
    std::sort(regions.begin(), regions.end(), [](const RegionProps& a, const RegionProps& b) {
      return a.area != b.area ? a.area > b.area : a.label < b.label;
    });
    const RegionProps& best = regions[0];
    if (regions.size() > 1) {
      const RegionProps& second = regions[1];
      const double radius = std::sqrt(best.area / 3.14159265358979);
      if (second.area >= tol.ambiguity_ratio * best.area &&
          (second.centroid - best.centroid).norm() > 4.0 * radius + 2.0)
        throw LandmarkError(ErrorKind::landmark_ambiguous, id,
                            "landmark " + std::to_string(id) + " has two comparable blobs");
    }
    out[id] = best.centroid;
  }
  return out;
}

}  // namespace wmr
