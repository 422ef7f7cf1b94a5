#pragma once

#include "wmr/dataset.hpp"
#include "wmr/metrics.hpp"
#include "wmr/retrieve.hpp"
#include "wmr/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wmr {

/// Seeded brightness/contrast shift applied to test images at evaluation
/// time, standing in for the photometric gap between renders and photos.
struct PhotometricShift {
  double brightness = 0.0;  // uniform in [-brightness, brightness]
  double contrast_min = 1.0;
  double contrast_max = 1.0;

  bool active() const { return brightness > 0 || contrast_min != 1.0 || contrast_max != 1.0; }
};

struct ExperimentConfig {
  std::string name = "experiment";
  SceneTemplate tmpl;
  int train_count = 160;
  int val_count = 20;
  int test_count = 20;
  std::uint64_t seed = 1;
  TrainConfig train;
  RetrievalParams retrieval;
  std::vector<double> beta_candidates;  // non-empty: pick beta on the validation set
  PhotometricShift test_shift;

  // Ablation switches.
  double texture_pool_fraction = 1.0;  // of the template pool, for training data only
  double dataset_fraction = 1.0;       // of train_count
  // Training-set mix-in from an external manifest (fine-tuning mode).
  std::optional<std::filesystem::path> external_manifest;
  double external_fraction = 0.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
/// Reads a config; relative paths inside resolve against its directory.
ExperimentConfig read_experiment_config(const std::filesystem::path& path);

/// Texture families kept for a pool fraction: a seeded subset of
/// ceil(fraction * n) entries, at least one.
std::vector<TextureFamily> texture_subset(const std::vector<TextureFamily>& pool, double fraction, std::uint64_t seed);

struct ExperimentResult {
  MetricsReport report;
  double beta = 0.0;
  int best_epoch = -1;  // -1 in oracle mode
  std::string test_digest;
  std::filesystem::path dir;
};

struct RunOptions {
  bool oracle = false;
  std::optional<std::filesystem::path> data_root;  // shared dataset cache; default <out>/data
  bool verbose = true;
};

/// Generates (or reuses) train/val/test datasets with disjoint seeds,
/// trains, selects beta, decodes the test set and writes config.json,
/// weights.bin, loss_curve.txt, report.txt and report.json under out_dir.
/// On error a FAILED file holding the message is written and the error
/// is rethrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                const RunOptions& opts = {});

/// Dataset for (template, count, seed) under data_root, generated on first
/// use and reused afterwards.
DatasetManifest cached_dataset(const SceneTemplate& tmpl, int count, std::uint64_t seed,
                               const std::filesystem::path& data_root);

/// Runs `cfg` in runs_dir/run-<config hash>, or loads the report of an
/// earlier successful run with the same configuration.
ExperimentResult cached_experiment(const ExperimentConfig& cfg, const std::filesystem::path& runs_dir,
                                   const RunOptions& opts = {});

enum class AblationAxis { dataset_size, texture_pool, augmentation };
AblationAxis ablation_axis_from_string(const std::string& s);
std::string_view to_string(AblationAxis axis);

struct AblationLevel {
  double level = 0.0;
  ExperimentResult result;
};

struct AblationResult {
  AblationAxis axis = AblationAxis::dataset_size;
  std::vector<AblationLevel> levels;
  bool shared_test_set = false;  // all levels evaluated on the same test manifest
  bool monotone_recall = false;  // non-decreasing in level order
  std::string to_text() const;
};

/// Runs one experiment per level with everything else fixed, through
/// cached_experiment under out_dir/runs, so a baseline common to several
/// axes is trained once.
AblationResult run_ablation(const ExperimentConfig& base, AblationAxis axis, const std::vector<double>& levels,
                            const std::filesystem::path& out_dir, const RunOptions& opts = {});

ExperimentConfig ablation_config(const ExperimentConfig& base, AblationAxis axis, double level);

}  // namespace wmr
