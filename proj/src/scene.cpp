#include "wmr/scene.hpp"

#include "wmr/error.hpp"
#include "wmr/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wmr {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

enum Stream : std::uint64_t {
  kColorStream = 1,
  kTextureStream = 2,
  kLightStream = 3,
  kJitterStream = 4,
};

Eigen::Matrix3d rot_z(double deg) {
  return Eigen::AngleAxisd(deg * kDeg, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace

std::string_view to_string(LightKind kind) {
  switch (kind) {
    case LightKind::parallel: return "parallel";
    case LightKind::point: return "point";
    case LightKind::spot: return "spot";
    case LightKind::area: return "area";
    case LightKind::fading: return "fading";
  }
  return "unknown";
}

void SceneTemplate::validate() const {
  layout.validate();
  if (frames_per_cycle < 1) throw Error(ErrorKind::invalid_argument, "frames_per_cycle must be >= 1");
  if (render_height < 1 || render_width < 1)
    throw Error(ErrorKind::invalid_argument, "render size must be positive");
  if (texture_pool.empty()) throw Error(ErrorKind::invalid_argument, "texture pool is empty");
  if (supersample < 1) throw Error(ErrorKind::invalid_argument, "supersample must be >= 1");
  if (!(camera_fov > 0 && camera_fov < 180))
    throw Error(ErrorKind::invalid_argument, "camera fov must be in (0, 180)");
  if (!(base_camera_distance > 0 && shift_range >= 0 && j_height > 0))
    throw Error(ErrorKind::invalid_argument, "camera distances must be positive");
  if (!(texture_scale_min > 0 && texture_scale_max >= texture_scale_min))
    throw Error(ErrorKind::invalid_argument, "texture scale range invalid");
}

void SceneConfig::validate() const {
  if (!(clock >= 0.0 && clock <= 1.0)) throw Error(ErrorKind::invalid_argument, "clock outside [0,1]");
  if ((model_color.array() < 0.0).any() || (model_color.array() > 1.0).any())
    throw Error(ErrorKind::invalid_argument, "model color outside [0,1]");
  for (int k = 0; k < 5; ++k)
    if ((lights[k].intensity.array() < 0.0).any())
      throw Error(ErrorKind::invalid_argument, "negative light intensity");
}

Eigen::Vector3d color_coefficients(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kColorStream));
  Eigen::Vector3d c;
  for (int k = 0; k < 3; ++k) c[k] = rng.uniform_open(0.0, 5.0);
  return c;
}

Eigen::Vector3d color_from_coefficients(double clock, const Eigen::Vector3d& coefficients) {
  Eigen::Vector3d out;
  for (int k = 0; k < 3; ++k) {
    const double v = coefficients[k] * clock;
    out[k] = v - std::floor(v);
  }
  return out;
}

Eigen::Vector3d randomize_color(double clock, std::uint64_t seed) {
  return color_from_coefficients(clock, color_coefficients(seed));
}

double camera_height_at(double clock, double j_start, double j_height) {
  return j_start + j_height * (1.0 - std::cos(4.0 * std::numbers::pi * (clock - j_start))) / 2.0;
}

double camera_elevation_at(const SceneTemplate& tmpl, double camera_height) {
  const double t = std::clamp((camera_height - tmpl.j_start) / tmpl.j_height, 0.0, 1.0);
  return tmpl.elevation_min_deg + t * (tmpl.elevation_max_deg - tmpl.elevation_min_deg);
}

SceneConfig scene_at_clock(const SceneTemplate& tmpl, double clock, std::uint64_t seed) {
  if (!(clock >= 0.0 && clock <= 1.0)) throw Error(ErrorKind::invalid_argument, "clock outside [0,1]");
  tmpl.validate();

  SceneConfig s;
  s.clock = clock;
  s.seed = seed;
  s.model_spin = std::fmod(360.0 * clock * 30.0, 360.0);
  s.model_orbit = 360.0 * clock;
  s.camera_orbit = std::fmod(360.0 * clock * 12.0, 360.0);
  s.camera_height = camera_height_at(clock, tmpl.j_start, tmpl.j_height);
  s.camera_elevation = camera_elevation_at(tmpl, s.camera_height);

  Rng jitter(derive_seed(seed, kJitterStream));
  for (int k = 0; k < 3; ++k) s.camera_jitter[k] = jitter.uniform(-tmpl.shift_range, tmpl.shift_range);

  s.model_color = randomize_color(clock, seed);

  Rng tex(derive_seed(seed, kTextureStream));
  s.texture.id = tmpl.texture_pool[tex.below(static_cast<int>(tmpl.texture_pool.size()))];
  s.texture.scale = std::exp(tex.uniform(std::log(tmpl.texture_scale_min), std::log(tmpl.texture_scale_max)));
  for (int k = 0; k < 3; ++k) s.texture.secondary[k] = tex.uniform();

  // light_1 hangs above the middle of the orbit; lights 2-5 sit around it.
  Rng lr(derive_seed(seed, kLightStream));
  auto tint = [&lr](double level) {
    Eigen::Vector3d c;
    for (int k = 0; k < 3; ++k) c[k] = level * lr.uniform(0.92, 1.0);
    return c;
  };
  const Eigen::Vector3d center = model_center(tmpl, s);
  const double ring = 260.0, height = 240.0;

  LightSource& l1 = s.lights[0];
  l1.kind = LightKind::parallel;
  l1.position = Eigen::Vector3d(0, 0, 300.0);
  l1.direction = (center - l1.position).normalized();
  l1.intensity = tint(lr.uniform(0.45, 0.9));

  LightSource& l2 = s.lights[1];
  l2.kind = LightKind::point;
  l2.position = Eigen::Vector3d(0.6 * ring, 0, 0.7 * height);
  l2.intensity = tint(lr.uniform(0.05, 0.35));

  LightSource& l3 = s.lights[2];
  l3.kind = LightKind::spot;
  l3.position = Eigen::Vector3d(0, ring, height);
  l3.direction = (Eigen::Vector3d::Zero() - l3.position).normalized();
  l3.spot_cone_deg = lr.uniform(20.0, 35.0);
  l3.spot_falloff_deg = l3.spot_cone_deg + lr.uniform(5.0, 20.0);
  l3.intensity = tint(lr.uniform(0.05, 0.4));

  LightSource& l4 = s.lights[3];
  l4.kind = LightKind::area;
  l4.position = Eigen::Vector3d(-ring, 0, height);
  l4.area_extent = lr.uniform(60.0, 140.0);
  l4.area_samples = 2;
  l4.intensity = tint(lr.uniform(0.05, 0.35));

  LightSource& l5 = s.lights[4];
  l5.kind = LightKind::fading;
  l5.position = Eigen::Vector3d(0, -ring, height);
  l5.fade_distance = lr.uniform(150.0, 350.0);
  l5.fade_power = lr.uniform(1.0, 3.0);
  l5.intensity = tint(lr.uniform(0.05, 0.35));

  for (int k = 1; k < 5; ++k)
    s.lights[k].position += Eigen::Vector3d(lr.uniform(-30, 30), lr.uniform(-30, 30), lr.uniform(-30, 30));
  return s;
}

Eigen::Vector3d model_center(const SceneTemplate& tmpl, const SceneConfig& scene) {
  const double a = scene.model_orbit * kDeg;
  return {tmpl.orbit_radius * std::cos(a), tmpl.orbit_radius * std::sin(a), 0.0};
}

Eigen::Vector3d world_to_model_point(const SceneTemplate& tmpl, const SceneConfig& scene,
                                     const Eigen::Vector3d& p) {
  return rot_z(-scene.model_spin) * (p - model_center(tmpl, scene));
}

Eigen::Vector3d world_to_model_dir(const SceneConfig& scene, const Eigen::Vector3d& d) {
  return rot_z(-scene.model_spin) * d;
}

Eigen::Vector3d CameraPose::ray(double x, double y) const {
  return (forward * focal_px + right * (x - 0.5 * width) - up * (y - 0.5 * height)).normalized();
}

bool CameraPose::project(const Eigen::Vector3d& p, Eigen::Vector2d& pixel) const {
  const Eigen::Vector3d d = p - eye;
  const double z = d.dot(forward);
  if (z <= 1e-9) return false;
  pixel.x() = 0.5 * width + focal_px * d.dot(right) / z;
  pixel.y() = 0.5 * height - focal_px * d.dot(up) / z;
  return true;
}

CameraPose camera_pose(const SceneTemplate& tmpl, const SceneConfig& scene, int height, int width) {
  const double el = scene.camera_elevation * kDeg, az = scene.camera_orbit * kDeg;
  const Eigen::Vector3d offset =
      tmpl.base_camera_distance *
          Eigen::Vector3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)) +
      scene.camera_jitter;

  CameraPose cam;
  cam.height = height;
  cam.width = width;
  cam.eye = world_to_model_dir(scene, offset);  // model center is the rotation pivot
  cam.forward = (-cam.eye).normalized();
  const Eigen::Vector3d right = cam.forward.cross(Eigen::Vector3d::UnitZ());
  if (right.norm() < 1e-6) throw Error(ErrorKind::render_error, "camera looks straight down the up axis");
  cam.right = right.normalized();
  cam.up = cam.right.cross(cam.forward);
  cam.focal_px = 0.5 * height / std::tan(0.5 * tmpl.camera_fov * kDeg);
  return cam;
}

}  // namespace wmr
