#include "wmr/watermark.hpp"

#include "wmr/error.hpp"
#include "wmr/random.hpp"

#include <fstream>
#include <sstream>

namespace wmr {

BitMatrix::BitMatrix(int m) {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "bit matrix size must be positive");
  bits_ = Storage::Zero(m, m);
}

BitMatrix::BitMatrix(Storage bits) : bits_(std::move(bits)) {
  if (bits_.rows() != bits_.cols() || bits_.rows() < 1)
    throw Error(ErrorKind::invalid_argument, "bit matrix must be square and non-empty");
  if ((bits_ > 1).any()) throw Error(ErrorKind::invalid_argument, "bit values must be 0 or 1");
}

int BitMatrix::count_ones() const { return static_cast<int>(bits_.cast<int>().sum()); }

bool BitMatrix::operator==(const BitMatrix& other) const {
  return bits_.rows() == other.bits_.rows() && (bits_ == other.bits_).all();
}

void GridLayout::validate() const {
  if (!(pitch > 0 && bump_radius > 0 && bump_height > 0 && plate_half_extent > 0 &&
        plate_thickness > 0 && landmark_offset > 0 && landmark_radius > 0))
    throw Error(ErrorKind::invalid_layout, "all lengths must be positive");
  if (bump_radius >= pitch / 2)
    throw Error(ErrorKind::invalid_layout, "bump radius must be below half the pitch");
}

BitMatrix random_bit_matrix(int m, std::uint64_t seed) {
  if (m < 2) throw Error(ErrorKind::invalid_argument, "random_bit_matrix needs m >= 2");
  Rng rng(derive_seed(seed, 0xb175));
  BitMatrix::Storage bits(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) bits(i, j) = static_cast<std::uint8_t>(rng.next_u64() >> 63);
  return BitMatrix(std::move(bits));
}

double landmark_half_side(int m, const GridLayout& layout) {
  return 0.5 * (m - 1) * layout.pitch + layout.landmark_offset;
}

Eigen::Vector2d cell_center(int m, const GridLayout& layout, int i, int j) {
  const double half = 0.5 * (m - 1);
  return {(j - half) * layout.pitch, (half - i) * layout.pitch};
}

Eigen::Vector2d registered_cell_center(int m, const GridLayout& layout, int i, int j,
                                       double square_size) {
  const double side = 2.0 * landmark_half_side(m, layout);
  const double scale = square_size / side;
  return {(layout.landmark_offset + j * layout.pitch) * scale,
          (layout.landmark_offset + i * layout.pitch) * scale};
}

double registered_pitch(int m, const GridLayout& layout, double square_size) {
  return layout.pitch * square_size / (2.0 * landmark_half_side(m, layout));
}

BumpSet layout_geometry(const BitMatrix& bits, const GridLayout& layout) {
  layout.validate();
  const int m = bits.size();
  const double half = landmark_half_side(m, layout);
  if (half + layout.landmark_radius >= layout.plate_half_extent)
    throw Error(ErrorKind::invalid_layout, "grid and landmarks exceed the plate");
  if (layout.landmark_radius >= layout.landmark_offset)
    throw Error(ErrorKind::invalid_layout, "landmarks overlap the bump grid");

  BumpSet set;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!bits(i, j)) continue;
      const Eigen::Vector2d c = cell_center(m, layout, i, j);
      set.bumps.push_back({Eigen::Vector3d(c.x(), c.y(), 0.0), layout.bump_radius, i, j});
    }
  }
  const std::array<Eigen::Vector2d, 4> corners{Eigen::Vector2d(-half, half),
                                               Eigen::Vector2d(half, half),
                                               Eigen::Vector2d(half, -half),
                                               Eigen::Vector2d(-half, -half)};
  for (int k = 0; k < 4; ++k)
    set.landmarks[k] = {Eigen::Vector3d(corners[k].x(), corners[k].y(), 0.0),
                        layout.landmark_radius, k};
  return set;
}

std::string to_text(const BitMatrix& bits) {
  std::string out = std::to_string(bits.size()) + "\n";
  for (int i = 0; i < bits.size(); ++i) {
    for (int j = 0; j < bits.size(); ++j) out += bits(i, j) ? '1' : '0';
    out += '\n';
  }
  return out;
}

BitMatrix parse_bit_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::dataset_error, "empty bit matrix text");
  int m = 0;
  try {
    std::size_t used = 0;
    m = std::stoi(line, &used);
    if (used != line.size()) throw std::invalid_argument(line);
  } catch (const std::exception&) {
    throw Error(ErrorKind::dataset_error, "bad bit matrix header: " + line);
  }
  if (m < 1) throw Error(ErrorKind::dataset_error, "bit matrix size must be positive");
  BitMatrix::Storage bits(m, m);
  for (int i = 0; i < m; ++i) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) != m)
      throw Error(ErrorKind::dataset_error, "bit matrix row " + std::to_string(i) + " malformed");
    for (int j = 0; j < m; ++j) {
      if (line[j] != '0' && line[j] != '1')
        throw Error(ErrorKind::dataset_error, "bit matrix contains non-binary character");
      bits(i, j) = line[j] == '1';
    }
  }
  return BitMatrix(std::move(bits));
}

void write_bit_matrix(const std::filesystem::path& path, const BitMatrix& bits) {
  std::ofstream out(path, std::ios::binary);
  out << to_text(bits);
  if (!out) throw Error(ErrorKind::write_error, "cannot write " + path.string());
}

BitMatrix read_bit_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::dataset_error, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bit_matrix(buf.str());
}

}  // namespace wmr
