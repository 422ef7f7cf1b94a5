#pragma once

#include "wmr/decode.hpp"
#include "wmr/homography.hpp"
#include "wmr/landmarks.hpp"
#include "wmr/nn/cnn3dw.hpp"
#include "wmr/regions.hpp"
#include "wmr/threshold.hpp"
#include "wmr/watermark.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace wmr {

struct RetrievalParams {
  double beta = 0.35;
  int m = 20;
  int square_size = 640;        // side of the registered square, 32 px per cell
  double min_axis_sum = -1.0;   // negative: 0.25 * square_size / m
  GridLayout layout;
  LandmarkTolerance landmarks;
  std::uint64_t seed = 0;       // k-means seeding

  double effective_min_axis_sum() const { return min_axis_sum < 0 ? 0.25 * square_size / m : min_axis_sum; }
  void validate() const;
};

void to_json(nlohmann::json& j, const RetrievalParams& p);
void from_json(const nlohmann::json& j, RetrievalParams& p);
RetrievalParams read_retrieval_params(const std::filesystem::path& path);

/// Every intermediate of one retrieval.
struct RetrievalDiagnostics {
  ConfidenceMap map;            // decoder input (network or oracle map)
  Quad landmarks_image;         // pixel coordinates in the input image
  Quad landmarks_map;           // scaled to map coordinates
  Homography homography;        // map -> registered square
  ConfidenceMap registered;
  OtsuResult otsu;
  ConfidenceMap binary;
  std::vector<RegionProps> regions;
  std::vector<Eigen::Vector2d> accepted;  // after the axis filter and grid bounds
  DecodeResult decode;
};

struct RetrievalResult {
  BitMatrix bits;
  RetrievalDiagnostics diagnostics;
};

/// Decoding stages downstream of the network. `map` may be at any
/// resolution; landmark coordinates are rescaled by map width / image width.
RetrievalResult decode_confidence_map(const ImageBuffer& img, const ConfidenceMap& map, const RetrievalParams& params);

RetrievalResult retrieve(const ImageBuffer& img, const nn::NetworkWeights& weights, const RetrievalParams& params);

/// Writes <stem>.map.pgm, <stem>.bin.pgm and <stem>.ctr.ppm (binary map with
/// accepted centroids marked) under dir.
void write_diagnostics(const std::filesystem::path& dir, const std::string& stem, const RetrievalDiagnostics& d);

/// Binary registered map as RGB with a 3x3 red mark at each accepted centroid.
ImageBuffer centroid_panel(const RetrievalDiagnostics& d);

}  // namespace wmr
