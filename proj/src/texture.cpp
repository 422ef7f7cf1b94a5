#include "wmr/texture.hpp"

#include "wmr/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace wmr {

namespace {

constexpr std::array<std::string_view, kTextureFamilyCount> kNames{
    "checker", "stripes", "value_noise", "turbulence", "marble", "wood_rings",
    "dots",    "gradient", "cells",      "brick",      "fbm",    "speckle"};

std::uint64_t lattice_hash(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed) {
  std::uint64_t h = mix_seed(seed);
  h = mix_seed(h ^ static_cast<std::uint64_t>(x));
  h = mix_seed(h ^ static_cast<std::uint64_t>(y));
  return mix_seed(h ^ static_cast<std::uint64_t>(z));
}

double lattice_value(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed) {
  return static_cast<double>(lattice_hash(x, y, z, seed) >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double frac(double x) { return x - std::floor(x); }

double fbm(const Eigen::Vector3d& p, std::uint64_t seed, int octaves, bool turbulent) {
  double sum = 0.0, amp = 1.0, norm = 0.0;
  Eigen::Vector3d q = p;
  for (int k = 0; k < octaves; ++k) {
    const double n = value_noise(q, seed + k);
    sum += amp * (turbulent ? std::abs(2.0 * n - 1.0) : n);
    norm += amp;
    amp *= 0.5;
    q *= 2.03;
  }
  return sum / norm;
}

// Distance from p to the nearest jittered feature point of the unit lattice.
double worley(const Eigen::Vector3d& p, std::uint64_t seed) {
  const Eigen::Vector3d cell = p.array().floor();
  double best = 1e9;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const auto cx = static_cast<std::int64_t>(cell.x()) + dx;
        const auto cy = static_cast<std::int64_t>(cell.y()) + dy;
        const auto cz = static_cast<std::int64_t>(cell.z()) + dz;
        const Eigen::Vector3d feature(cx + lattice_value(cx, cy, cz, seed),
                                      cy + lattice_value(cx, cy, cz, seed + 1),
                                      cz + lattice_value(cx, cy, cz, seed + 2));
        best = std::min(best, (feature - p).norm());
      }
  return best;
}

}  // namespace

std::string_view to_string(TextureFamily family) { return kNames[static_cast<int>(family)]; }

std::optional<TextureFamily> texture_family_from_string(std::string_view name) {
  for (int k = 0; k < kTextureFamilyCount; ++k)
    if (kNames[k] == name) return static_cast<TextureFamily>(k);
  return std::nullopt;
}

std::vector<TextureFamily> all_texture_families() {
  std::vector<TextureFamily> out;
  for (int k = 0; k < kTextureFamilyCount; ++k) out.push_back(static_cast<TextureFamily>(k));
  return out;
}

double value_noise(const Eigen::Vector3d& p, std::uint64_t seed) {
  const Eigen::Vector3d f = p.array().floor();
  const auto x0 = static_cast<std::int64_t>(f.x());
  const auto y0 = static_cast<std::int64_t>(f.y());
  const auto z0 = static_cast<std::int64_t>(f.z());
  const double tx = smooth(p.x() - f.x()), ty = smooth(p.y() - f.y()), tz = smooth(p.z() - f.z());
  auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
  double plane[2];
  for (int dz = 0; dz < 2; ++dz) {
    const double a = lerp(lattice_value(x0, y0, z0 + dz, seed), lattice_value(x0 + 1, y0, z0 + dz, seed), tx);
    const double b = lerp(lattice_value(x0, y0 + 1, z0 + dz, seed),
                          lattice_value(x0 + 1, y0 + 1, z0 + dz, seed), tx);
    plane[dz] = lerp(a, b, ty);
  }
  return lerp(plane[0], plane[1], tz);
}

double texture_pattern(const TextureSpec& spec, const Eigen::Vector3d& point, std::uint64_t seed) {
  const Eigen::Vector3d p = point / spec.scale;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (spec.id) {
    case TextureFamily::checker: {
      const auto sum = static_cast<std::int64_t>(std::floor(2 * p.x()) + std::floor(2 * p.y()) +
                                                 std::floor(2 * p.z()));
      return static_cast<double>(((sum % 2) + 2) % 2);
    }
    case TextureFamily::stripes:
      return 0.5 + 0.5 * std::sin(two_pi * p.x());
    case TextureFamily::value_noise:
      return value_noise(p, seed);
    case TextureFamily::turbulence:
      return std::clamp(1.6 * fbm(p, seed, 4, true), 0.0, 1.0);
    case TextureFamily::marble:
      return 0.5 + 0.5 * std::sin(two_pi * (p.x() + 2.0 * fbm(p, seed, 4, true)));
    case TextureFamily::wood_rings:
      return frac(std::hypot(p.x(), p.y()) + 0.4 * value_noise(p, seed));
    case TextureFamily::dots: {
      const Eigen::Vector3d c = (p.array() + 0.5).floor();
      return (p - c).head<2>().norm() < 0.3 ? 1.0 : 0.0;
    }
    case TextureFamily::gradient:
      return std::abs(2.0 * frac(0.5 * (p.x() + 0.5 * p.y())) - 1.0);
    case TextureFamily::cells:
      return std::clamp(worley(p, seed), 0.0, 1.0);
    case TextureFamily::brick: {
      const double row = std::floor(2.0 * p.y());
      const double u = frac(p.x() + 0.5 * row);
      const double v = frac(2.0 * p.y());
      return (u < 0.06 || v < 0.12) ? 1.0 : 0.0;
    }
    case TextureFamily::fbm:
      return fbm(p, seed, 5, false);
    case TextureFamily::speckle: {
      const Eigen::Vector3d q = (8.0 * p).array().floor();
      return lattice_value(static_cast<std::int64_t>(q.x()), static_cast<std::int64_t>(q.y()),
                           static_cast<std::int64_t>(q.z()), seed) > 0.8
                 ? 1.0
                 : 0.0;
    }
  }
  return 0.0;
}

Eigen::Vector3d sample_texture(const TextureSpec& spec, const Eigen::Vector3d& base_color,
                               const Eigen::Vector3d& surface_point, std::uint64_t seed) {
  const double f = texture_pattern(spec, surface_point, seed);
  return ((1.0 - f) * base_color + f * spec.secondary).cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace wmr
