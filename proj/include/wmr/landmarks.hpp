#pragma once

#include "wmr/homography.hpp"
#include "wmr/image.hpp"

namespace wmr {

struct LandmarkTolerance {
  double hue_deg = 25.0;       // half-width around the landmark hue
  double min_chroma = 0.2;     // max - min channel
  double min_saturation = 0.5; // chroma / max channel; keeps bright pastels out
  double ambiguity_ratio = 0.5;
};

/// Hue in degrees [0, 360) of an RGB triple; 0 for grays.
double hue_deg(float r, float g, float b);

/// Pixels matching landmark color `color_id` (red, green, blue, yellow).
ConfidenceMap landmark_mask(const ImageBuffer& img, int color_id, const LandmarkTolerance& tol);

/// Centroid (pixel indices) of the largest blob of each landmark color,
/// ordered by color id. Throws landmark-not-found(color_id) when a color has
/// no qualifying pixel and landmark-ambiguous when a second blob of
/// comparable size lies far from the first.
Quad detect_landmarks(const ImageBuffer& img, const LandmarkTolerance& tol);

}  // namespace wmr
