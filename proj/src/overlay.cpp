#include "wmr/overlay.hpp"

namespace wmr {

namespace {

void paste_gray(ImageBuffer& out, const ConfidenceMap& map, int x0) {
  for (Eigen::Index y = 0; y < map.rows(); ++y)
    for (Eigen::Index x = 0; x < map.cols(); ++x) {
      const float v = std::clamp(map(y, x), 0.0f, 1.0f);
      out.pixels.row(y * out.width + x0 + x).setConstant(v);
    }
}

}  // namespace

ImageBuffer overlay_panels(const ImageBuffer& img, const RetrievalDiagnostics& d) {
  const int s = static_cast<int>(d.binary.rows());
  if (s == 0 || d.binary.cols() != s || d.registered.rows() != s)
    throw Error(ErrorKind::invalid_argument, "diagnostics hold no registered maps");
  ImageBuffer out(s, 4 * s);
  out.pixels.setZero();
  for (int c = 0; c < 3; ++c) {
    const ConfidenceMap resized = resize_bilinear(img.channel(c), s, s);
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x) out.pixels(Eigen::Index(y) * out.width + x, c) = resized(y, x);
  }
  paste_gray(out, d.registered, s);
  paste_gray(out, d.binary, 2 * s);
  const ImageBuffer centroids = centroid_panel(d);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x)
      out.pixels.row(Eigen::Index(y) * out.width + 3 * s + x) = centroids.pixels.row(Eigen::Index(y) * s + x);
  return out;
}

void overlay_diagnostics(const ImageBuffer& img, const RetrievalDiagnostics& d, const std::filesystem::path& path) {
  write_ppm(path, overlay_panels(img, d));
}

}  // namespace wmr
