#include "wmr/nn/cnn3dw.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace wmr::nn {

namespace {

constexpr char kMagic[4] = {'W', 'M', 'R', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorKind::dataset_error, "weights file truncated");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

void put_floats(std::ostream& os, const Eigen::VectorXf& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_u32(os, std::bit_cast<std::uint32_t>(v[i]));
}

void get_floats(std::istream& is, Eigen::VectorXf& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::bit_cast<float>(get_u32(is));
}

}  // namespace

Tensor<float> images_to_tensor(const std::vector<const ImageBuffer*>& imgs) {
  if (imgs.empty()) throw Error(ErrorKind::shape_error, "no images");
  const int h = imgs[0]->height, w = imgs[0]->width;
  Tensor<float> t(static_cast<int>(imgs.size()), 3, h, w);
  for (int ni = 0; ni < t.n; ++ni) {
    const ImageBuffer& img = *imgs[ni];
    if (img.height != h || img.width != w) throw Error(ErrorKind::shape_error, "batch images differ in size");
    t.sample(ni) = img.pixels.matrix().transpose();
  }
  return t;
}

Tensor<float> image_to_tensor(const ImageBuffer& img) { return images_to_tensor({&img}); }

ConfidenceMap tensor_to_map(const Tensor<float>& t, int ni) {
  ConfidenceMap map(t.h, t.w);
  std::memcpy(map.data(), t.plane(ni, 0), sizeof(float) * static_cast<std::size_t>(t.h) * t.w);
  return map;
}

ConfidenceMap forward_cnn3dw(const ImageBuffer& img, const NetworkWeights& weights) {
  return tensor_to_map(network_forward(weights, image_to_tensor(img))).cwiseMax(0.0f).cwiseMin(1.0f);
}

void write_weights(const std::filesystem::path& path, const NetworkWeights& weights) {
  validate_network(weights);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::write_error, "cannot open " + path.string());
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(weights.convs.size()));
  for (const auto& c : weights.convs) {
    put_u32(os, static_cast<std::uint32_t>(c.c_out()));
    put_u32(os, static_cast<std::uint32_t>(c.c_in()));
    put_u32(os, static_cast<std::uint32_t>(c.kernel.h));
    put_u32(os, static_cast<std::uint32_t>(c.kernel.w));
    put_floats(os, c.kernel.data);
    put_floats(os, c.bias);
  }
  if (!os) throw Error(ErrorKind::write_error, "failed writing " + path.string());
}

NetworkWeights read_weights(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::dataset_error, "cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorKind::dataset_error, path.string() + " is not a weights file");
  if (const auto v = get_u32(is); v != kVersion)
    throw Error(ErrorKind::dataset_error, "unsupported weights version " + std::to_string(v));
  const std::uint32_t layers = get_u32(is);
  if (layers != 5) throw Error(ErrorKind::dataset_error, "expected 5 layers, found " + std::to_string(layers));
  NetworkWeights net;
  for (std::uint32_t i = 0; i < layers; ++i) {
    std::uint32_t dims[4];
    for (auto& d : dims) {
      d = get_u32(is);
      if (d == 0 || d > 4096) throw Error(ErrorKind::dataset_error, "implausible layer dimension in weights file");
    }
    ConvLayer<float> c{Tensor<float>(int(dims[0]), int(dims[1]), int(dims[2]), int(dims[3])),
                       Eigen::VectorXf::Zero(dims[0])};
    get_floats(is, c.kernel.data);
    get_floats(is, c.bias);
    net.convs.push_back(std::move(c));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error(ErrorKind::dataset_error, "trailing bytes in weights file");
  try {
    validate_network(net);
  } catch (const Error& e) {
    throw Error(ErrorKind::dataset_error, std::string("invalid weights file: ") + e.what());
  }
  return net;
}

}  // namespace wmr::nn
