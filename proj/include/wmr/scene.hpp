#pragma once

#include "wmr/texture.hpp"
#include "wmr/watermark.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wmr {

enum class LightKind { parallel, point, spot, area, fading };

std::string_view to_string(LightKind kind);

struct LightSource {
  LightKind kind = LightKind::point;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();   // world frame
  Eigen::Vector3d direction = -Eigen::Vector3d::UnitZ();  // parallel and spot
  Eigen::Vector3d intensity = Eigen::Vector3d::Ones();
  double spot_cone_deg = 30.0;     // full-intensity half angle
  double spot_falloff_deg = 45.0;  // zero-intensity half angle
  double area_extent = 100.0;      // side of the square emitter
  int area_samples = 2;            // per side
  double fade_distance = 250.0;
  double fade_power = 2.0;
};

/// Per-dataset constants of the generator; individual frames are
/// derived from it with scene_at_clock.
struct SceneTemplate {
  GridLayout layout;
  BitMatrix bits{20};
  int frames_per_cycle = 120;
  double j_start = 0.1;
  double j_height = 0.6;
  double elevation_min_deg = 25.0;  // camera elevation at height j_start
  double elevation_max_deg = 70.0;  // camera elevation at height j_start + j_height
  double camera_fov = 40.0;         // vertical, degrees
  double base_camera_distance = 190.0;
  double shift_range = 0.08 * 190.0;
  double orbit_radius = 150.0;  // model orbit around the primary light
  std::vector<TextureFamily> texture_pool = all_texture_families();
  double texture_scale_min = 2.0;
  double texture_scale_max = 30.0;
  int render_height = 512;
  int render_width = 512;
  int supersample = 2;  // per axis, beauty pass only
  std::filesystem::path background_dir;  // optional user images (PPM)

  void validate() const;
};

/// Fully resolved frame.
struct SceneConfig {
  double clock = 0.0;
  double model_spin = 0.0;    // degrees, mod 360
  double model_orbit = 0.0;   // degrees
  double camera_orbit = 0.0;  // degrees, mod 360
  double camera_height = 0.0;
  double camera_elevation = 0.0;  // degrees, derived from camera_height
  Eigen::Vector3d camera_jitter = Eigen::Vector3d::Zero();
  Eigen::Vector3d model_color = Eigen::Vector3d::Constant(0.5);
  TextureSpec texture;
  std::array<LightSource, 5> lights;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Coefficients (alpha, beta, gamma) drawn uniformly on (0, 5).
Eigen::Vector3d color_coefficients(std::uint64_t seed);

/// Fractional part of coefficient * clock per channel.
Eigen::Vector3d color_from_coefficients(double clock, const Eigen::Vector3d& coefficients);

Eigen::Vector3d randomize_color(double clock, std::uint64_t seed);

/// Camera height parameter for a clock value (cosine vertical motion).
double camera_height_at(double clock, double j_start, double j_height);

/// Maps camera_height in [j_start, j_start + j_height] linearly to elevation.
double camera_elevation_at(const SceneTemplate& tmpl, double camera_height);

SceneConfig scene_at_clock(const SceneTemplate& tmpl, double clock, std::uint64_t seed);

/// Pose of the plate and camera in the model frame (plate centered at the
/// origin, top face at z = 0), which is where the renderer works.
struct CameraPose {
  Eigen::Vector3d eye;
  Eigen::Vector3d forward;
  Eigen::Vector3d right;
  Eigen::Vector3d up;
  double focal_px = 0.0;  // focal length in pixels
  int height = 0;
  int width = 0;

  /// Ray direction (unit) through continuous pixel coordinate (x, y); pixel
  /// centers sit at integer + 0.5.
  Eigen::Vector3d ray(double x, double y) const;

  /// Projects a model-frame point; returns false when behind the camera.
  bool project(const Eigen::Vector3d& p, Eigen::Vector2d& pixel) const;
};

/// World-frame model center for a scene.
Eigen::Vector3d model_center(const SceneTemplate& tmpl, const SceneConfig& scene);

/// World to model frame (inverse of spin about the model center).
Eigen::Vector3d world_to_model_point(const SceneTemplate& tmpl, const SceneConfig& scene,
                                     const Eigen::Vector3d& p);
Eigen::Vector3d world_to_model_dir(const SceneConfig& scene, const Eigen::Vector3d& d);

CameraPose camera_pose(const SceneTemplate& tmpl, const SceneConfig& scene, int height,
                       int width);

}  // namespace wmr
