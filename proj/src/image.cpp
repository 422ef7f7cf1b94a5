#include "wmr/image.hpp"

#include "wmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace wmr {

namespace {

void write_pnm(const std::filesystem::path& path, const char* magic, int width, int height,
               const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << magic << '\n' << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::write_error, "cannot write " + path.string());
}

// Reads the header token stream of a binary PNM, skipping comments.
int read_token(std::istream& in) {
  std::string token;
  while (in >> token) {
    if (token[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return std::stoi(token);
  }
  throw Error(ErrorKind::dataset_error, "truncated PNM header");
}

std::vector<std::uint8_t> read_pnm(const std::filesystem::path& path, const std::string& magic,
                                   int channels, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::dataset_error, "cannot read " + path.string());
  std::string m;
  in >> m;
  if (m != magic) throw Error(ErrorKind::dataset_error, path.string() + " is not " + magic);
  width = read_token(in);
  height = read_token(in);
  const int maxval = read_token(in);
  if (maxval != 255 || width <= 0 || height <= 0)
    throw Error(ErrorKind::dataset_error, "unsupported PNM layout in " + path.string());
  in.get();
  std::vector<std::uint8_t> bytes(std::size_t(width) * height * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error(ErrorKind::dataset_error, "truncated raster " + path.string());
  return bytes;
}

}  // namespace

Plane<float> ImageBuffer::channel(int c) const {
  Plane<float> out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(y, x) = pixel(y, x)(c);
  return out;
}

std::uint8_t quantize(float v) {
  const float c = std::clamp(std::isfinite(v) ? v : 0.0f, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::floor(c * 255.0f + 0.5f));
}

void write_ppm(const std::filesystem::path& path, const ImageBuffer& img) {
  std::vector<std::uint8_t> bytes(img.pixels.size());
  for (Eigen::Index k = 0; k < img.pixels.rows(); ++k)
    for (int c = 0; c < 3; ++c) bytes[k * 3 + c] = quantize(img.pixels(k, c));
  write_pnm(path, "P6", img.width, img.height, bytes);
}

ImageBuffer read_ppm(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_pnm(path, "P6", 3, w, h);
  ImageBuffer img(h, w);
  for (Eigen::Index k = 0; k < img.pixels.rows(); ++k)
    for (int c = 0; c < 3; ++c) img.pixels(k, c) = bytes[k * 3 + c] / 255.0f;
  return img;
}

void write_pgm(const std::filesystem::path& path, const ConfidenceMap& map) {
  std::vector<std::uint8_t> bytes(map.size());
  for (Eigen::Index y = 0; y < map.rows(); ++y)
    for (Eigen::Index x = 0; x < map.cols(); ++x)
      bytes[y * map.cols() + x] = quantize(map(y, x));
  write_pnm(path, "P5", static_cast<int>(map.cols()), static_cast<int>(map.rows()), bytes);
}

ConfidenceMap read_pgm(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto bytes = read_pnm(path, "P5", 1, w, h);
  ConfidenceMap map(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) map(y, x) = bytes[std::size_t(y) * w + x] / 255.0f;
  return map;
}

ConfidenceMap average_pool(const ConfidenceMap& map, int factor) {
  if (factor < 1 || map.rows() % factor || map.cols() % factor)
    throw Error(ErrorKind::shape_error, "average_pool factor must divide the map");
  const Eigen::Index h = map.rows() / factor, w = map.cols() / factor;
  ConfidenceMap out(h, w);
  const float norm = 1.0f / float(factor * factor);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      out(y, x) = map.block(y * factor, x * factor, factor, factor).sum() * norm;
  return out;
}

ConfidenceMap resize_bilinear(const ConfidenceMap& map, int height, int width) {
  ConfidenceMap out(height, width);
  const double sy = double(map.rows()) / height, sx = double(map.cols()) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(map.rows() - 1));
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(map.cols() - 1));
      out(y, x) = sample_bilinear(map, fx, fy);
    }
  }
  return out;
}

}  // namespace wmr
