#pragma once

#include "wmr/image.hpp"
#include "wmr/scene.hpp"
#include "wmr/watermark.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <vector>

namespace wmr {

enum class SurfaceKind { none, plate, bump, landmark };

struct RayHit {
  SurfaceKind kind = SurfaceKind::none;
  int index = -1;  // bump or landmark index
  double t = std::numeric_limits<double>::infinity();
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

/// Ray queries against the plate, its hemispherical bumps and the landmarks,
/// all in the model frame. Spheres are binned on a pitch-sized 2D grid so a
/// query only visits the cells its above-plate segment crosses.
class SceneTracer {
 public:
  SceneTracer(const BumpSet& geometry, const GridLayout& layout);

  RayHit trace(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

  /// True when anything blocks the ray within (eps, max_t).
  bool occluded(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double max_t) const;

  bool inside(const Eigen::Vector3d& p) const;

 private:
  struct Sphere {
    Eigen::Vector3d center;
    double radius;
    SurfaceKind kind;
    int index;
  };

  void trace_spheres(const Eigen::Vector3d& o, const Eigen::Vector3d& d, RayHit& best) const;
  void trace_plate(const Eigen::Vector3d& o, const Eigen::Vector3d& d, RayHit& best) const;

  std::vector<Sphere> spheres_;
  std::vector<std::vector<int>> cells_;
  double half_extent_;
  double thickness_;
  double grid_origin_;
  double cell_size_;
  int grid_n_;
  double max_radius_;
};

/// Landmark-safe plate albedo: pulls a color towards gray so plate pixels never
/// reach the saturation of the pure landmark hues.
Eigen::Vector3d plate_safe_color(const Eigen::Vector3d& c);

/// Beauty pass. Pixels are premultiplied by `alpha`, the fraction of
/// supersamples that hit geometry.
ImageBuffer render_image(const SceneConfig& scene, const BumpSet& geometry, const SceneTemplate& tmpl);

/// Binary bump mask from one center ray per pixel, pixel-aligned with render_image.
ConfidenceMap render_ground_truth(const SceneConfig& scene, const BumpSet& geometry,
                                  const SceneTemplate& tmpl);

/// Replaces background (alpha 0) pixels with `bg`, tiling it when smaller.
ImageBuffer composite_background(const ImageBuffer& img, const ImageBuffer& bg);

/// Low-saturation procedural backdrop.
ImageBuffer procedural_background(int height, int width, std::uint64_t seed);

/// Picks a background for a frame: a random crop/tile from the PPM files in
/// `dir` when it is non-empty, otherwise procedural.
ImageBuffer pick_background(const std::filesystem::path& dir, int height, int width,
                            std::uint64_t seed);

}  // namespace wmr
