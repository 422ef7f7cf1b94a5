#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace wmr {

enum class TextureFamily {
  checker,
  stripes,
  value_noise,
  turbulence,
  marble,
  wood_rings,
  dots,
  gradient,
  cells,
  brick,
  fbm,
  speckle,
};

inline constexpr int kTextureFamilyCount = 12;

std::string_view to_string(TextureFamily family);
std::optional<TextureFamily> texture_family_from_string(std::string_view name);
std::vector<TextureFamily> all_texture_families();

struct TextureSpec {
  TextureFamily id = TextureFamily::checker;
  double scale = 10.0;  // pattern period in model units
  Eigen::Vector3d secondary = Eigen::Vector3d::Constant(0.5);
};

/// Lattice value noise in [0, 1] with smoothstep interpolation.
double value_noise(const Eigen::Vector3d& p, std::uint64_t seed);

/// Pattern weight in [0, 1] blending the base color (0) and secondary (1).
double texture_pattern(const TextureSpec& spec, const Eigen::Vector3d& p, std::uint64_t seed);

Eigen::Vector3d sample_texture(const TextureSpec& spec, const Eigen::Vector3d& base_color,
                               const Eigen::Vector3d& surface_point, std::uint64_t seed);

}  // namespace wmr
