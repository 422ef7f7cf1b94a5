#pragma once

#include "wmr/dataset.hpp"
#include "wmr/nn/cnn3dw.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace wmr {

struct TrainConfig {
  int batch_size = 4;
  int epochs = 30;
  double lr = 1e-4;
  double lr_drop = 1e-5;
  int drop_epoch = 22;  // epochs with index >= drop_epoch use lr_drop
  int patch_size = 256;
  std::uint64_t seed = 1;
  bool deterministic = true;
  bool augment = true;
  double brightness = 0.15;  // uniform in [-brightness, brightness]
  double contrast_min = 0.7;
  double contrast_max = 1.4;
  double val_fraction = 0.1;  // used only when no validation manifest is given
  nn::Architecture architecture;
  std::optional<std::filesystem::path> init_weights;

  void validate() const;
  double lr_at(int epoch) const { return epoch >= drop_epoch ? lr_drop : lr; }
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without validation data
};

struct TrainResult {
  nn::NetworkWeights weights;  // best validation epoch
  int best_epoch = 0;
  std::vector<EpochRecord> history;
};

/// An image with its ground-truth map average-pooled to network resolution.
struct TrainSample {
  ImageBuffer image;
  ConfidenceMap target;
};

std::vector<TrainSample> load_samples(const DatasetManifest& manifest);

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train_cnn3dw(std::vector<TrainSample> train, std::vector<TrainSample> val, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

/// Loads the manifests; splits val_fraction off `train` when `val` is null.
TrainResult train_cnn3dw(const DatasetManifest& train, const DatasetManifest* val, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

/// Two columns: epoch, training loss.
void write_loss_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace wmr
