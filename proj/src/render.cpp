#include "wmr/render.hpp"

#include "wmr/error.hpp"
#include "wmr/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wmr {

namespace {

constexpr double kEps = 1e-6;
constexpr double kSpecular = 0.25;
constexpr double kShininess = 32.0;

// Offsets texture lookups off the exact z = 0 plane so lattice patterns do
// not flicker with the sign of round-off.
const Eigen::Vector3d kTextureOffset(0.0, 0.0, 0.1);

struct PreparedLight {
  LightKind kind;
  Eigen::Vector3d intensity;
  std::vector<Eigen::Vector3d> positions;  // model frame; one per area sample
  Eigen::Vector3d toward;                  // parallel: unit vector towards the light
  Eigen::Vector3d spot_axis;
  double cos_cone = 1.0, cos_falloff = 1.0;
  double fade_distance = 1.0, fade_power = 1.0;
};

std::vector<PreparedLight> prepare_lights(const SceneConfig& scene, const SceneTemplate& tmpl) {
  std::vector<PreparedLight> out;
  for (const LightSource& l : scene.lights) {
    PreparedLight p;
    p.kind = l.kind;
    p.intensity = l.intensity;
    p.toward = -world_to_model_dir(scene, l.direction).normalized();
    p.spot_axis = world_to_model_dir(scene, l.direction).normalized();
    p.cos_cone = std::cos(l.spot_cone_deg * std::numbers::pi / 180.0);
    p.cos_falloff = std::cos(l.spot_falloff_deg * std::numbers::pi / 180.0);
    p.fade_distance = l.fade_distance;
    p.fade_power = l.fade_power;
    if (l.kind == LightKind::area) {
      const int n = std::max(1, l.area_samples);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const Eigen::Vector3d offset(l.area_extent * ((a + 0.5) / n - 0.5),
                                       l.area_extent * ((b + 0.5) / n - 0.5), 0.0);
          p.positions.push_back(world_to_model_point(tmpl, scene, l.position + offset));
        }
      p.intensity /= double(n * n);
    } else {
      p.positions.push_back(world_to_model_point(tmpl, scene, l.position));
    }
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::Vector3d shade(const RayHit& hit, const Eigen::Vector3d& view_dir, const SceneConfig& scene,
                      const BumpSet& geometry, const std::vector<PreparedLight>& lights,
                      const SceneTracer& tracer) {
  const bool is_landmark = hit.kind == SurfaceKind::landmark;
  Eigen::Vector3d albedo;
  if (is_landmark) {
    albedo = landmark_colors()[geometry.landmarks[hit.index].color_id];
  } else {
    const Eigen::Vector3d base = plate_safe_color(scene.model_color);
    TextureSpec tex = scene.texture;
    tex.secondary = plate_safe_color(tex.secondary);
    albedo = sample_texture(tex, base, hit.point + kTextureOffset, scene.seed);
  }

  const Eigen::Vector3d& n = hit.normal;
  const Eigen::Vector3d to_eye = -view_dir;
  const Eigen::Vector3d origin = hit.point + n * 1e-4;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();

  for (std::size_t li = 0; li < lights.size(); ++li) {
    const PreparedLight& l = lights[li];
    for (const Eigen::Vector3d& pos : l.positions) {
      Eigen::Vector3d to_light;
      double scale = 1.0;
      if (l.kind == LightKind::parallel) {
        to_light = l.toward;
      } else {
        const Eigen::Vector3d delta = pos - hit.point;
        const double dist = delta.norm();
        to_light = delta / dist;
        if (l.kind == LightKind::spot) {
          const double c = (-to_light).dot(l.spot_axis);
          if (c <= l.cos_falloff) continue;
          if (c < l.cos_cone) {
            const double t = (c - l.cos_falloff) / (l.cos_cone - l.cos_falloff);
            scale = t * t * (3.0 - 2.0 * t);
          }
        } else if (l.kind == LightKind::fading) {
          scale = 2.0 / (1.0 + std::pow(dist / l.fade_distance, l.fade_power));
        }
      }
      const double ndotl = n.dot(to_light);
      if (ndotl <= 0.0) continue;
      // Hard shadows from the primary light only.
      if (li == 0 && tracer.occluded(origin, to_light, std::numeric_limits<double>::infinity()))
        continue;
      const Eigen::Vector3d e = l.intensity * scale;
      color += albedo.cwiseProduct(e) * ndotl;
      if (!is_landmark) {
        const Eigen::Vector3d h = (to_light + to_eye).normalized();
        const double s = std::max(0.0, n.dot(h));
        color += e * (kSpecular * std::pow(s, kShininess));
      }
    }
  }
  return color;
}

}  // namespace

SceneTracer::SceneTracer(const BumpSet& geometry, const GridLayout& layout)
    : half_extent_(layout.plate_half_extent), thickness_(layout.plate_thickness) {
  max_radius_ = 0.0;
  double reach = 0.0;
  for (std::size_t k = 0; k < geometry.bumps.size(); ++k) {
    const Bump& b = geometry.bumps[k];
    spheres_.push_back({b.center, b.radius, SurfaceKind::bump, static_cast<int>(k)});
  }
  for (int k = 0; k < 4; ++k) {
    const Landmark& l = geometry.landmarks[k];
    spheres_.push_back({l.center, l.radius, SurfaceKind::landmark, k});
  }
  for (const Sphere& s : spheres_) {
    max_radius_ = std::max(max_radius_, s.radius);
    reach = std::max({reach, std::abs(s.center.x()) + s.radius, std::abs(s.center.y()) + s.radius});
  }
  cell_size_ = std::max(layout.pitch, 1e-3);
  grid_n_ = std::max(1, static_cast<int>(std::ceil(2.0 * reach / cell_size_)) + 2);
  grid_origin_ = -0.5 * grid_n_ * cell_size_;
  cells_.assign(std::size_t(grid_n_) * grid_n_, {});
  for (int k = 0; k < static_cast<int>(spheres_.size()); ++k) {
    const Sphere& s = spheres_[k];
    const int x0 = static_cast<int>(std::floor((s.center.x() - s.radius - grid_origin_) / cell_size_));
    const int x1 = static_cast<int>(std::floor((s.center.x() + s.radius - grid_origin_) / cell_size_));
    const int y0 = static_cast<int>(std::floor((s.center.y() - s.radius - grid_origin_) / cell_size_));
    const int y1 = static_cast<int>(std::floor((s.center.y() + s.radius - grid_origin_) / cell_size_));
    for (int y = std::max(0, y0); y <= std::min(grid_n_ - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(grid_n_ - 1, x1); ++x)
        cells_[std::size_t(y) * grid_n_ + x].push_back(k);
  }
}

void SceneTracer::trace_spheres(const Eigen::Vector3d& o, const Eigen::Vector3d& d, RayHit& best) const {
  if (spheres_.empty()) return;
  // Parameter interval where the ray lies in the slab 0 <= z <= max_radius.
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  if (std::abs(d.z()) < 1e-12) {
    if (o.z() < 0.0 || o.z() > max_radius_) return;
  } else {
    double ta = (0.0 - o.z()) / d.z(), tb = (max_radius_ - o.z()) / d.z();
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  // Clip to the grid square.
  const double lo = grid_origin_, hi = -grid_origin_;
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-12) {
      if (o[axis] < lo || o[axis] > hi) return;
      continue;
    }
    double ta = (lo - o[axis]) / d[axis], tb = (hi - o[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t0 >= best.t) return;
  t1 = std::min(t1, best.t);

  const Eigen::Vector3d a = o + t0 * d, b = o + t1 * d;
  auto cell_of = [this](double v) {
    return std::clamp(static_cast<int>(std::floor((v - grid_origin_) / cell_size_)), 0, grid_n_ - 1);
  };
  const int x0 = cell_of(std::min(a.x(), b.x())), x1 = cell_of(std::max(a.x(), b.x()));
  const int y0 = cell_of(std::min(a.y(), b.y())), y1 = cell_of(std::max(a.y(), b.y()));
  for (int cy = y0; cy <= y1; ++cy) {
    for (int cx = x0; cx <= x1; ++cx) {
      for (int k : cells_[std::size_t(cy) * grid_n_ + cx]) {
        const Sphere& s = spheres_[k];
        const Eigen::Vector3d oc = o - s.center;
        const double bq = oc.dot(d);
        const double c = oc.squaredNorm() - s.radius * s.radius;
        const double disc = bq * bq - c;
        if (disc < 0.0) continue;
        const double t = -bq - std::sqrt(disc);
        if (t <= kEps || t >= best.t) continue;
        const Eigen::Vector3d p = o + t * d;
        if (p.z() < -1e-9) continue;  // lower half is inside the plate
        best.kind = s.kind;
        best.index = s.index;
        best.t = t;
        best.point = p;
        best.normal = (p - s.center) / s.radius;
      }
    }
  }
}

void SceneTracer::trace_plate(const Eigen::Vector3d& o, const Eigen::Vector3d& d, RayHit& best) const {
  const Eigen::Vector3d lo(-half_extent_, -half_extent_, -thickness_);
  const Eigen::Vector3d hi(half_extent_, half_extent_, 0.0);
  double tmin = -std::numeric_limits<double>::infinity(), tmax = std::numeric_limits<double>::infinity();
  int axis_in = -1;
  double sign_in = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-12) {
      if (o[a] < lo[a] || o[a] > hi[a]) return;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
    double s = -1.0;
    if (ta > tb) {
      std::swap(ta, tb);
      s = 1.0;
    }
    if (ta > tmin) {
      tmin = ta;
      axis_in = a;
      sign_in = s;
    }
    tmax = std::min(tmax, tb);
  }
  if (tmin > tmax || tmin <= kEps || tmin >= best.t || axis_in < 0) return;
  best.kind = SurfaceKind::plate;
  best.index = -1;
  best.t = tmin;
  best.point = o + tmin * d;
  best.normal = Eigen::Vector3d::Zero();
  best.normal[axis_in] = sign_in;
}

RayHit SceneTracer::trace(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const {
  RayHit best;
  trace_plate(origin, dir, best);
  trace_spheres(origin, dir, best);
  return best;
}

bool SceneTracer::occluded(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, double max_t) const {
  RayHit best;
  best.t = max_t;
  trace_plate(origin, dir, best);
  if (best.kind != SurfaceKind::none) return true;
  trace_spheres(origin, dir, best);
  return best.kind != SurfaceKind::none;
}

bool SceneTracer::inside(const Eigen::Vector3d& p) const {
  if (std::abs(p.x()) <= half_extent_ && std::abs(p.y()) <= half_extent_ && p.z() <= 0.0 &&
      p.z() >= -thickness_)
    return true;
  for (const Sphere& s : spheres_)
    if ((p - s.center).norm() <= s.radius && p.z() >= 0.0) return true;
  return false;
}

Eigen::Vector3d plate_safe_color(const Eigen::Vector3d& c) {
  constexpr double lift = 0.12, keep = 0.3;
  const double mean = c.mean();
  const Eigen::Vector3d gray = Eigen::Vector3d::Constant(mean) + keep * (c - Eigen::Vector3d::Constant(mean));
  return Eigen::Vector3d::Constant(lift) + (1.0 - lift) * gray;
}

ImageBuffer render_image(const SceneConfig& scene, const BumpSet& geometry, const SceneTemplate& tmpl) {
  scene.validate();
  const int h = tmpl.render_height, w = tmpl.render_width, ss = tmpl.supersample;
  const CameraPose cam = camera_pose(tmpl, scene, h, w);
  const SceneTracer tracer(geometry, tmpl.layout);
  if (tracer.inside(cam.eye)) throw Error(ErrorKind::render_error, "camera inside geometry");
  const auto lights = prepare_lights(scene, tmpl);

  ImageBuffer img(h, w);
  const double inv = 1.0 / double(ss * ss);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Eigen::Vector3d acc = Eigen::Vector3d::Zero();
      int hits = 0;
      for (int sy = 0; sy < ss; ++sy)
        for (int sx = 0; sx < ss; ++sx) {
          const Eigen::Vector3d dir = cam.ray(x + (sx + 0.5) / ss, y + (sy + 0.5) / ss);
          const RayHit hit = tracer.trace(cam.eye, dir);
          if (hit.kind == SurfaceKind::none) continue;
          ++hits;
          acc += shade(hit, dir, scene, geometry, lights, tracer);
        }
      const Eigen::Vector3d c = (acc * inv).cwiseMax(0.0).cwiseMin(1.0);
      img.pixel(y, x) = c.cast<float>().transpose().array();
      img.alpha(y, x) = static_cast<float>(hits * inv);
    }
  }
  return img;
}

ConfidenceMap render_ground_truth(const SceneConfig& scene, const BumpSet& geometry,
                                  const SceneTemplate& tmpl) {
  scene.validate();
  const int h = tmpl.render_height, w = tmpl.render_width;
  const CameraPose cam = camera_pose(tmpl, scene, h, w);
  const SceneTracer tracer(geometry, tmpl.layout);
  if (tracer.inside(cam.eye)) throw Error(ErrorKind::render_error, "camera inside geometry");
  ConfidenceMap map = ConfidenceMap::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (tracer.trace(cam.eye, cam.ray(x + 0.5, y + 0.5)).kind == SurfaceKind::bump) map(y, x) = 1.0f;
  return map;
}

ImageBuffer composite_background(const ImageBuffer& img, const ImageBuffer& bg) {
  if (bg.height < 1 || bg.width < 1) throw Error(ErrorKind::invalid_argument, "empty background");
  ImageBuffer out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const float a = img.alpha(y, x);
      if (a >= 1.0f) continue;
      const auto b = bg.pixel(y % bg.height, x % bg.width);
      out.pixel(y, x) = img.pixel(y, x) + (1.0f - a) * b;
      out.alpha(y, x) = 1.0f;
    }
  return out;
}

ImageBuffer procedural_background(int height, int width, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xb6));
  TextureSpec spec;
  spec.id = static_cast<TextureFamily>(rng.below(kTextureFamilyCount));
  spec.scale = std::exp(rng.uniform(std::log(8.0), std::log(160.0)));
  Eigen::Vector3d a, b;
  for (int k = 0; k < 3; ++k) {
    a[k] = rng.uniform();
    b[k] = rng.uniform();
  }
  a = plate_safe_color(a) * rng.uniform(0.3, 1.1);
  spec.secondary = plate_safe_color(b) * rng.uniform(0.3, 1.1);
  const double slope = rng.uniform(-0.4, 0.4);
  const std::uint64_t pattern_seed = rng.next_u64();

  ImageBuffer img(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d p(x, y, 0.37);
      const double shade = 1.0 + slope * (double(y) / height - 0.5);
      const Eigen::Vector3d c = (sample_texture(spec, a, p, pattern_seed) * shade).cwiseMax(0.0).cwiseMin(1.0);
      img.pixel(y, x) = c.cast<float>().transpose().array();
    }
  return img;
}

ImageBuffer pick_background(const std::filesystem::path& dir, int height, int width, std::uint64_t seed) {
  if (dir.empty()) return procedural_background(height, width, seed);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  if (files.empty()) return procedural_background(height, width, seed);
  std::sort(files.begin(), files.end());
  Rng rng(derive_seed(seed, 0xb7));
  const ImageBuffer src = read_ppm(files[rng.below(static_cast<int>(files.size()))]);
  const int oy = src.height > height ? rng.below(src.height - height + 1) : 0;
  const int ox = src.width > width ? rng.below(src.width - width + 1) : 0;
  ImageBuffer out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.pixel(y, x) = src.pixel((oy + y) % src.height, (ox + x) % src.width);
  return out;
}

}  // namespace wmr
