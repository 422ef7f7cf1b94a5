#include "wmr/retrieve.hpp"

#include "wmr/serialize.hpp"

#include <cmath>

namespace wmr {

void RetrievalParams::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorKind::invalid_argument, "beta must lie in (0, 1]");
  if (m < 2) throw Error(ErrorKind::invalid_argument, "m must be at least 2");
  if (square_size < m || square_size % m)
    throw Error(ErrorKind::invalid_argument, "square_size must be a positive multiple of m");
  layout.validate();
}

void to_json(nlohmann::json& j, const RetrievalParams& p) {
  j = {{"beta", p.beta},
       {"m", p.m},
       {"square_size", p.square_size},
       {"min_axis_sum", p.effective_min_axis_sum()},
       {"layout", p.layout},
       {"hue_tolerance_deg", p.landmarks.hue_deg},
       {"min_chroma", p.landmarks.min_chroma},
       {"min_saturation", p.landmarks.min_saturation},
       {"ambiguity_ratio", p.landmarks.ambiguity_ratio},
       {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, RetrievalParams& p) {
  auto opt = [&j](const char* key, auto& out) {
    if (j.contains(key)) j.at(key).get_to(out);
  };
  opt("beta", p.beta);
  opt("m", p.m);
  opt("square_size", p.square_size);
  opt("min_axis_sum", p.min_axis_sum);
  opt("layout", p.layout);
  opt("hue_tolerance_deg", p.landmarks.hue_deg);
  opt("min_chroma", p.landmarks.min_chroma);
  opt("min_saturation", p.landmarks.min_saturation);
  opt("ambiguity_ratio", p.landmarks.ambiguity_ratio);
  opt("seed", p.seed);
}

RetrievalParams read_retrieval_params(const std::filesystem::path& path) {
  RetrievalParams p;
  try {
    p = read_json(path).get<RetrievalParams>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, path.string() + ": " + e.what());
  }
  p.validate();
  return p;
}

RetrievalResult decode_confidence_map(const ImageBuffer& img, const ConfidenceMap& map,
                                      const RetrievalParams& params) {
  params.validate();
  if (map.rows() == 0 || map.cols() == 0) throw Error(ErrorKind::shape_error, "empty confidence map");
  RetrievalResult r;
  RetrievalDiagnostics& d = r.diagnostics;
  d.map = map;
  d.landmarks_image = detect_landmarks(img, params.landmarks);

  // Pixel-center convention: u = (x + 0.5) * s - 0.5.
  const double sx = double(map.cols()) / img.width, sy = double(map.rows()) / img.height;
  for (int k = 0; k < 4; ++k)
    d.landmarks_map[k] = {(d.landmarks_image[k].x() + 0.5) * sx - 0.5, (d.landmarks_image[k].y() + 0.5) * sy - 0.5};

  const double s = params.square_size;
  const Quad corners = {Eigen::Vector2d(0, 0), Eigen::Vector2d(s, 0), Eigen::Vector2d(s, s), Eigen::Vector2d(0, s)};
  d.homography = estimate_homography(d.landmarks_map, corners);
  d.registered = warp_map(map, d.homography, params.square_size);

  d.otsu = otsu_threshold(d.registered);
  if (d.otsu.degenerate)
    d.binary = ConfidenceMap::Zero(d.registered.rows(), d.registered.cols());
  else
    d.binary = binarize(d.registered, params.beta, d.otsu.threshold);

  int count = 0;
  const Plane<int> labels = label_components(d.binary, count);
  d.regions = region_analysis(labels, count);
  const double pitch = registered_pitch(params.m, params.layout, s);
  const double radius = params.layout.bump_radius * pitch / params.layout.pitch;
  const std::vector<Eigen::Vector2d> kept =
      split_chains(labels, accepted_regions(d.regions, params.effective_min_axis_sum()), pitch,
                   radius + pitch, params.seed);
  d.accepted = within_grid(kept, params.m, s, params.layout);
  d.decode = decode_matrix(d.accepted, params.m, s, params.layout, params.seed);
  r.bits = d.decode.bits;
  return r;
}

RetrievalResult retrieve(const ImageBuffer& img, const nn::NetworkWeights& weights, const RetrievalParams& params) {
  if (img.height % 4 || img.width % 4)
    throw Error(ErrorKind::shape_error, "image dimensions must be divisible by 4");
  return decode_confidence_map(img, nn::forward_cnn3dw(img, weights), params);
}

ImageBuffer centroid_panel(const RetrievalDiagnostics& d) {
  const int h = static_cast<int>(d.binary.rows()), w = static_cast<int>(d.binary.cols());
  ImageBuffer out(h, w);
  for (int c = 0; c < 3; ++c) out.pixels.col(c) = d.binary.reshaped<Eigen::RowMajor>();
  for (const auto& p : d.accepted) {
    const int cx = static_cast<int>(std::lround(p.x())), cy = static_cast<int>(std::lround(p.y()));
    for (int y = cy - 1; y <= cy + 1; ++y)
      for (int x = cx - 1; x <= cx + 1; ++x)
        if (y >= 0 && y < h && x >= 0 && x < w) out.pixels.row(Eigen::Index(y) * w + x) << 1.0f, 0.0f, 0.0f;
  }
  return out;
}

void write_diagnostics(const std::filesystem::path& dir, const std::string& stem, const RetrievalDiagnostics& d) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::write_error, "cannot create " + dir.string());
  write_pgm(dir / (stem + ".map.pgm"), d.registered);
  write_pgm(dir / (stem + ".bin.pgm"), d.binary);
  write_ppm(dir / (stem + ".ctr.ppm"), centroid_panel(d));
}

}  // namespace wmr
