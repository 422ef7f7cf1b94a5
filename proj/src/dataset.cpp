#include "wmr/dataset.hpp"

#include "wmr/error.hpp"
#include "wmr/random.hpp"
#include "wmr/render.hpp"
#include "wmr/serialize.hpp"

#include <fstream>
#include <sstream>

namespace wmr {

namespace {

Json vec3(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void read_opt_vec3(const Json& j, const char* key, Eigen::Vector3d& out) {
  if (auto it = j.find(key); it != j.end()) out = vec3(*it);
}

LightKind light_kind_from_string(const std::string& s) {
  for (LightKind k : {LightKind::parallel, LightKind::point, LightKind::spot, LightKind::area, LightKind::fading})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::dataset_error, "unknown light kind " + s);
}

TextureFamily family_or_throw(const std::string& s) {
  if (auto f = texture_family_from_string(s)) return *f;
  throw Error(ErrorKind::dataset_error, "unknown texture family " + s);
}

}  // namespace

void to_json(Json& j, const GridLayout& v) {
  j = Json{{"pitch", v.pitch},
           {"bump_radius", v.bump_radius},
           {"bump_height", v.bump_height},
           {"plate_half_extent", v.plate_half_extent},
           {"plate_thickness", v.plate_thickness},
           {"landmark_offset", v.landmark_offset},
           {"landmark_radius", v.landmark_radius}};
}

void from_json(const Json& j, GridLayout& v) {
  read_opt(j, "pitch", v.pitch);
  read_opt(j, "bump_radius", v.bump_radius);
  read_opt(j, "bump_height", v.bump_height);
  read_opt(j, "plate_half_extent", v.plate_half_extent);
  read_opt(j, "plate_thickness", v.plate_thickness);
  read_opt(j, "landmark_offset", v.landmark_offset);
  read_opt(j, "landmark_radius", v.landmark_radius);
}

void to_json(Json& j, const TextureSpec& v) {
  j = Json{{"id", std::string(to_string(v.id))}, {"scale", v.scale}, {"secondary", vec3(v.secondary)}};
}

void from_json(const Json& j, TextureSpec& v) {
  if (auto it = j.find("id"); it != j.end()) v.id = family_or_throw(it->get<std::string>());
  read_opt(j, "scale", v.scale);
  read_opt_vec3(j, "secondary", v.secondary);
}

void to_json(Json& j, const LightSource& v) {
  j = Json{{"kind", std::string(to_string(v.kind))},
           {"position", vec3(v.position)},
           {"direction", vec3(v.direction)},
           {"intensity", vec3(v.intensity)},
           {"spot_cone_deg", v.spot_cone_deg},
           {"spot_falloff_deg", v.spot_falloff_deg},
           {"area_extent", v.area_extent},
           {"area_samples", v.area_samples},
           {"fade_distance", v.fade_distance},
           {"fade_power", v.fade_power}};
}

void from_json(const Json& j, LightSource& v) {
  if (auto it = j.find("kind"); it != j.end()) v.kind = light_kind_from_string(it->get<std::string>());
  read_opt_vec3(j, "position", v.position);
  read_opt_vec3(j, "direction", v.direction);
  read_opt_vec3(j, "intensity", v.intensity);
  read_opt(j, "spot_cone_deg", v.spot_cone_deg);
  read_opt(j, "spot_falloff_deg", v.spot_falloff_deg);
  read_opt(j, "area_extent", v.area_extent);
  read_opt(j, "area_samples", v.area_samples);
  read_opt(j, "fade_distance", v.fade_distance);
  read_opt(j, "fade_power", v.fade_power);
}

void to_json(Json& j, const SceneConfig& v) {
  j = Json{{"clock", v.clock},
           {"model_spin", v.model_spin},
           {"model_orbit", v.model_orbit},
           {"camera_orbit", v.camera_orbit},
           {"camera_height", v.camera_height},
           {"camera_elevation", v.camera_elevation},
           {"camera_jitter", vec3(v.camera_jitter)},
           {"model_color", vec3(v.model_color)},
           {"texture", v.texture},
           {"lights", Json(v.lights)},
           {"seed", v.seed}};
}

void from_json(const Json& j, SceneConfig& v) {
  read_opt(j, "clock", v.clock);
  read_opt(j, "model_spin", v.model_spin);
  read_opt(j, "model_orbit", v.model_orbit);
  read_opt(j, "camera_orbit", v.camera_orbit);
  read_opt(j, "camera_height", v.camera_height);
  read_opt(j, "camera_elevation", v.camera_elevation);
  read_opt_vec3(j, "camera_jitter", v.camera_jitter);
  read_opt_vec3(j, "model_color", v.model_color);
  read_opt(j, "texture", v.texture);
  if (auto it = j.find("lights"); it != j.end()) {
    if (it->size() != 5) throw Error(ErrorKind::dataset_error, "scene needs exactly 5 lights");
    for (int k = 0; k < 5; ++k) v.lights[k] = it->at(k).get<LightSource>();
  }
  read_opt(j, "seed", v.seed);
}

void to_json(Json& j, const SceneTemplate& v) {
  Json pool = Json::array();
  for (TextureFamily f : v.texture_pool) pool.push_back(std::string(to_string(f)));
  j = Json{{"layout", v.layout},
           {"m", v.bits.size()},
           {"frames_per_cycle", v.frames_per_cycle},
           {"j_start", v.j_start},
           {"j_height", v.j_height},
           {"elevation_min_deg", v.elevation_min_deg},
           {"elevation_max_deg", v.elevation_max_deg},
           {"camera_fov", v.camera_fov},
           {"base_camera_distance", v.base_camera_distance},
           {"shift_range", v.shift_range},
           {"orbit_radius", v.orbit_radius},
           {"texture_pool", pool},
           {"texture_scale_min", v.texture_scale_min},
           {"texture_scale_max", v.texture_scale_max},
           {"render_height", v.render_height},
           {"render_width", v.render_width},
           {"supersample", v.supersample},
           {"background_dir", v.background_dir.string()}};
}

void from_json(const Json& j, SceneTemplate& v) {
  read_opt(j, "layout", v.layout);
  if (auto it = j.find("m"); it != j.end()) v.bits = BitMatrix(it->get<int>());
  read_opt(j, "frames_per_cycle", v.frames_per_cycle);
  read_opt(j, "j_start", v.j_start);
  read_opt(j, "j_height", v.j_height);
  read_opt(j, "elevation_min_deg", v.elevation_min_deg);
  read_opt(j, "elevation_max_deg", v.elevation_max_deg);
  read_opt(j, "camera_fov", v.camera_fov);
  read_opt(j, "base_camera_distance", v.base_camera_distance);
  // shift_range defaults to 8% of the (possibly overridden) distance.
  v.shift_range = 0.08 * v.base_camera_distance;
  read_opt(j, "shift_range", v.shift_range);
  read_opt(j, "orbit_radius", v.orbit_radius);
  if (auto it = j.find("texture_pool"); it != j.end()) {
    v.texture_pool.clear();
    for (const auto& name : *it) v.texture_pool.push_back(family_or_throw(name.get<std::string>()));
  }
  read_opt(j, "texture_scale_min", v.texture_scale_min);
  read_opt(j, "texture_scale_max", v.texture_scale_max);
  read_opt(j, "render_height", v.render_height);
  read_opt(j, "render_width", v.render_width);
  read_opt(j, "supersample", v.supersample);
  if (auto it = j.find("background_dir"); it != j.end()) v.background_dir = it->get<std::string>();
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::dataset_error, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::dataset_error, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::write_error, "cannot write " + path.string());
}

// ---------------------------------------------------------------------------

Frame render_frame(const SceneTemplate& tmpl, int index, std::uint64_t seed) {
  const std::uint64_t frame_seed = derive_seed(seed, static_cast<std::uint64_t>(index));
  Frame f;
  f.seed = frame_seed;
  f.bits = random_bit_matrix(tmpl.bits.size(), derive_seed(frame_seed, 0xb1));
  f.clock = double(index % tmpl.frames_per_cycle) / double(tmpl.frames_per_cycle);
  f.scene = scene_at_clock(tmpl, f.clock, frame_seed);
  const BumpSet geometry = layout_geometry(f.bits, tmpl.layout);
  const ImageBuffer raw = render_image(f.scene, geometry, tmpl);
  f.image = composite_background(raw, pick_background(tmpl.background_dir, tmpl.render_height,
                                                      tmpl.render_width, frame_seed));
  f.ground_truth = render_ground_truth(f.scene, geometry, tmpl);
  return f;
}

DatasetManifest generate_dataset(const SceneTemplate& tmpl, int count, std::uint64_t seed,
                                 const std::filesystem::path& out_dir) {
  if (count < 1) throw Error(ErrorKind::invalid_argument, "count must be >= 1");
  tmpl.validate();
  namespace fs = std::filesystem;

  std::vector<fs::path> written;
  auto cleanup = [&written] {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
  };

  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.seed = seed;
  manifest.generator_version = kGeneratorVersion;
  manifest.tmpl = tmpl;
  try {
    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "truth");
    fs::create_directories(out_dir / "bits");
    for (int k = 0; k < count; ++k) {
      const Frame f = render_frame(tmpl, k, seed);
      char stem[32];
      std::snprintf(stem, sizeof stem, "%06d", k);
      ManifestEntry e;
      e.image = fs::path("images") / (std::string(stem) + ".ppm");
      e.ground_truth = fs::path("truth") / (std::string(stem) + ".pgm");
      e.bits = fs::path("bits") / (std::string(stem) + ".txt");
      e.seed = f.seed;
      e.clock = f.clock;
      e.scene = f.scene;
      written.push_back(out_dir / e.image);
      write_ppm(out_dir / e.image, f.image);
      written.push_back(out_dir / e.ground_truth);
      write_pgm(out_dir / e.ground_truth, f.ground_truth);
      written.push_back(out_dir / e.bits);
      write_bit_matrix(out_dir / e.bits, f.bits);
      manifest.entries.push_back(std::move(e));
    }
    written.push_back(out_dir / "manifest.json");
    write_manifest(out_dir / "manifest.json", manifest);
  } catch (const Error& err) {
    cleanup();
    if (err.kind() == ErrorKind::write_error || err.kind() == ErrorKind::dataset_error)
      throw Error(ErrorKind::dataset_write_error, err.what());
    throw;
  } catch (const fs::filesystem_error& err) {
    cleanup();
    throw Error(ErrorKind::dataset_write_error, err.what());
  }
  return manifest;
}

Json manifest_to_json(const DatasetManifest& m) {
  Json entries = Json::array();
  for (const ManifestEntry& e : m.entries)
    entries.push_back(Json{{"image", e.image.generic_string()},
                           {"ground_truth", e.ground_truth.generic_string()},
                           {"bits", e.bits.generic_string()},
                           {"seed", e.seed},
                           {"clock", e.clock},
                           {"scene", e.scene}});
  return Json{{"generator_version", m.generator_version},
              {"seed", m.seed},
              {"template", m.tmpl},
              {"entries", entries}};
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_json(path, manifest_to_json(m));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const Json j = read_json(path);
  DatasetManifest m;
  m.root = path.parent_path();
  try {
    m.generator_version = j.at("generator_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (auto it = j.find("template"); it != j.end()) m.tmpl = it->get<SceneTemplate>();
    for (const Json& e : j.at("entries")) {
      ManifestEntry entry;
      entry.image = e.at("image").get<std::string>();
      entry.ground_truth = e.at("ground_truth").get<std::string>();
      entry.bits = e.at("bits").get<std::string>();
      entry.seed = e.at("seed").get<std::uint64_t>();
      entry.clock = e.at("clock").get<double>();
      if (auto it = e.find("scene"); it != e.end()) entry.scene = it->get<SceneConfig>();
      m.entries.push_back(std::move(entry));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::dataset_error, path.string() + ": " + e.what());
  }
  return m;
}

std::string manifest_digest(const DatasetManifest& m) {
  // FNV-1a over the canonical JSON; stable across runs and platforms.
  const std::string text = manifest_to_json(m).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace wmr
