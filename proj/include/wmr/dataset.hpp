#pragma once

#include "wmr/image.hpp"
#include "wmr/scene.hpp"
#include "wmr/watermark.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wmr {

/// Bumped whenever the rendering of a (template, seed) pair changes.
inline constexpr const char* kGeneratorVersion = "wmr-synth/1";

/// One generated sample, in memory.
struct Frame {
  std::uint64_t seed = 0;
  double clock = 0.0;
  BitMatrix bits;
  SceneConfig scene;
  ImageBuffer image;  // composited over its background
  ConfidenceMap ground_truth;
};

/// Renders dataset entry `index`: fresh bits, clock = (index mod F) / F and
/// a per-frame seed derived from (seed, index), so frames are independent of
/// generation order.
Frame render_frame(const SceneTemplate& tmpl, int index, std::uint64_t seed);

struct ManifestEntry {
  std::filesystem::path image;  // relative to the manifest directory
  std::filesystem::path ground_truth;
  std::filesystem::path bits;
  std::uint64_t seed = 0;
  double clock = 0.0;
  SceneConfig scene;
};

struct DatasetManifest {
  std::filesystem::path root;  // directory holding manifest.json
  std::string generator_version = kGeneratorVersion;
  std::uint64_t seed = 0;
  SceneTemplate tmpl;
  std::vector<ManifestEntry> entries;

  std::filesystem::path path_of(const std::filesystem::path& rel) const { return root / rel; }
};

/// Writes images/, truth/, bits/ and manifest.json under out_dir. On failure
/// the files written so far are removed and dataset-write-error is thrown.
DatasetManifest generate_dataset(const SceneTemplate& tmpl, int count, std::uint64_t seed,
                                 const std::filesystem::path& out_dir);

nlohmann::json manifest_to_json(const DatasetManifest& m);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Hash of the canonical manifest text; equal digests mean equal datasets.
std::string manifest_digest(const DatasetManifest& m);

}  // namespace wmr
