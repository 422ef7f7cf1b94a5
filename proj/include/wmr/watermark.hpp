#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wmr {

/// Square m x m payload of 0/1 bits. Row 0 is the top row in the plate frame.
class BitMatrix {
 public:
  using Storage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BitMatrix() = default;
  explicit BitMatrix(int m);  // all zeros
  explicit BitMatrix(Storage bits);

  int size() const { return static_cast<int>(bits_.rows()); }
  std::uint8_t operator()(int i, int j) const { return bits_(i, j); }
  void set(int i, int j, bool value) { bits_(i, j) = value ? 1 : 0; }
  const Storage& bits() const { return bits_; }
  int count_ones() const;

  bool operator==(const BitMatrix& other) const;

 private:
  Storage bits_;
};

/// Physical dimensions of the embossed grid, in model units (mm).
struct GridLayout {
  double pitch = 4.0;
  double bump_radius = 1.2;
  double bump_height = 1.2;  // hemisphere
  double plate_half_extent = 60.0;
  double plate_thickness = 6.0;
  double landmark_offset = 4.0;
  double landmark_radius = 1.6;

  // Throws invalid-layout when an invariant is broken.
  void validate() const;
};

struct Bump {
  Eigen::Vector3d center;  // on the plate top face (z = 0)
  double radius = 0.0;
  int row = 0;
  int col = 0;
};

struct Landmark {
  Eigen::Vector3d center;
  double radius = 0.0;
  int color_id = 0;  // 0 top-left, 1 top-right, 2 bottom-right, 3 bottom-left
};

struct BumpSet {
  std::vector<Bump> bumps;
  std::array<Landmark, 4> landmarks;
};

/// Pure red, green, blue and yellow, indexed by landmark color id.
inline const std::array<Eigen::Vector3d, 4>& landmark_colors() {
  static const std::array<Eigen::Vector3d, 4> colors{
      Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
      Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 1, 0)};
  return colors;
}

BitMatrix random_bit_matrix(int m, std::uint64_t seed);

BumpSet layout_geometry(const BitMatrix& bits, const GridLayout& layout);

/// Plate-frame (x, y) of bump cell (i, j). Grid is centered on the plate,
/// row index grows towards -y.
Eigen::Vector2d cell_center(int m, const GridLayout& layout, int i, int j);

/// Half side of the square whose corners are the landmark centers.
double landmark_half_side(int m, const GridLayout& layout);

/// Position of cell (i, j) in a registered square of side `square_size`
/// whose corners are the landmark centers. Returns (x, y) in pixels.
Eigen::Vector2d registered_cell_center(int m, const GridLayout& layout, int i, int j,
                                       double square_size);

/// Distance between adjacent cells in the registered square, in pixels.
double registered_pitch(int m, const GridLayout& layout, double square_size);

// Text format: first line "m", then m lines of '0'/'1', newline-terminated.
std::string to_text(const BitMatrix& bits);
BitMatrix parse_bit_matrix(std::string_view text);
void write_bit_matrix(const std::filesystem::path& path, const BitMatrix& bits);
BitMatrix read_bit_matrix(const std::filesystem::path& path);

}  // namespace wmr
