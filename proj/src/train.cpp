#include "wmr/train.hpp"

#include "wmr/augment.hpp"
#include "wmr/random.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace wmr {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_argument, "train config: " + what); };
  if (batch_size < 1) fail("batch_size must be positive");
  if (epochs < 1) fail("epochs must be positive");
  if (!(lr > 0) || !(lr_drop > 0)) fail("learning rates must be positive");
  if (drop_epoch < 1 || drop_epoch > epochs) fail("drop_epoch must lie in [1, epochs]");
  if (patch_size < 4 || patch_size % 4) fail("patch_size must be a positive multiple of 4");
  if (brightness < 0 || brightness > 0.5) fail("brightness must lie in [0, 0.5]");
  if (contrast_min < 0.5 || contrast_max > 2 || contrast_min > contrast_max) fail("contrast range outside [0.5, 2]");
  if (val_fraction < 0 || val_fraction >= 1) fail("val_fraction must lie in [0, 1)");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"batch_size", c.batch_size},
       {"epochs", c.epochs},
       {"lr", c.lr},
       {"lr_drop", c.lr_drop},
       {"drop_epoch", c.drop_epoch},
       {"patch_size", c.patch_size},
       {"seed", c.seed},
       {"deterministic", c.deterministic},
       {"augment", c.augment},
       {"brightness", c.brightness},
       {"contrast_min", c.contrast_min},
       {"contrast_max", c.contrast_max},
       {"val_fraction", c.val_fraction},
       {"kernels", c.architecture.kernels},
       {"channels", c.architecture.channels}};
  if (c.init_weights) j["init_weights"] = c.init_weights->generic_string();
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  auto opt = [&j](const char* key, auto& out) {
    if (j.contains(key)) j.at(key).get_to(out);
  };
  opt("batch_size", c.batch_size);
  opt("epochs", c.epochs);
  opt("lr", c.lr);
  opt("lr_drop", c.lr_drop);
  opt("drop_epoch", c.drop_epoch);
  opt("patch_size", c.patch_size);
  opt("seed", c.seed);
  opt("deterministic", c.deterministic);
  opt("augment", c.augment);
  opt("brightness", c.brightness);
  opt("contrast_min", c.contrast_min);
  opt("contrast_max", c.contrast_max);
  opt("val_fraction", c.val_fraction);
  opt("kernels", c.architecture.kernels);
  opt("channels", c.architecture.channels);
  if (j.contains("init_weights")) c.init_weights = j.at("init_weights").get<std::string>();
}

std::vector<TrainSample> load_samples(const DatasetManifest& manifest) {
  std::vector<TrainSample> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    TrainSample s;
    s.image = read_ppm(manifest.path_of(e.image));
    const ConfidenceMap gt = read_pgm(manifest.path_of(e.ground_truth));
    if (gt.rows() != s.image.height || gt.cols() != s.image.width || s.image.height % 4 || s.image.width % 4)
      throw Error(ErrorKind::dataset_error, "bad image/truth dimensions for " + e.image.string());
    s.target = average_pool(gt, 4);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

int effective_patch(const std::vector<TrainSample>& samples, int patch) {
  for (const auto& s : samples) patch = std::min({patch, s.image.height, s.image.width});
  return patch / 4 * 4;
}

// Crop offsets on the 4-pixel lattice so the pooled target aligns exactly.
CropWindow aligned_crop(const TrainSample& s, int patch, Rng& rng) {
  CropWindow w;
  w.size = patch;
  w.y = 4 * rng.below((s.image.height - patch) / 4 + 1);
  w.x = 4 * rng.below((s.image.width - patch) / 4 + 1);
  return w;
}

ConfidenceMap target_crop(const TrainSample& s, const CropWindow& w) {
  return s.target.block(w.y / 4, w.x / 4, w.size / 4, w.size / 4);
}

void fill_target(nn::Tensor<float>& t, int ni, const ConfidenceMap& map) {
  std::copy(map.data(), map.data() + map.size(), t.plane(ni, 0));
}

double evaluate(const nn::NetworkWeights& net, const std::vector<TrainSample>& val,
                const std::vector<CropWindow>& windows) {
  double total = 0.0;
  for (std::size_t i = 0; i < val.size(); ++i) {
    const ImageBuffer img = crop(val[i].image, windows[i]);
    nn::Tensor<float> target(1, 1, windows[i].size / 4, windows[i].size / 4);
    fill_target(target, 0, target_crop(val[i], windows[i]));
    total += nn::mse_loss(nn::network_forward(net, nn::image_to_tensor(img)), target).loss;
  }
  return total / double(val.size());
}

}  // namespace

TrainResult train_cnn3dw(std::vector<TrainSample> train, std::vector<TrainSample> val, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorKind::dataset_error, "training set is empty");
  const int patch = effective_patch(train, cfg.patch_size);
  const int val_patch = val.empty() ? patch : effective_patch(val, cfg.patch_size);
  if (patch < 4 || val_patch < 4) throw Error(ErrorKind::dataset_error, "images smaller than 4 pixels");

  nn::NetworkWeights net =
      cfg.init_weights ? nn::read_weights(*cfg.init_weights) : nn::init_network<float>(cfg.seed, cfg.architecture);
  nn::OptimizerState adam;

  std::vector<CropWindow> val_windows;
  {
    Rng rng(derive_seed(cfg.seed, 0x7a1));
    for (const auto& s : val) val_windows.push_back(aligned_crop(s, val_patch, rng));
  }

  Rng rng(derive_seed(cfg.seed, 0x75a));
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.lr = cfg.lr_at(epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(static_cast<std::uint64_t>(i))]);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const int n = static_cast<int>(std::min<std::size_t>(cfg.batch_size, order.size() - start));
      std::vector<ImageBuffer> crops;
      crops.reserve(n);
      nn::Tensor<float> target(n, 1, patch / 4, patch / 4);
      for (int b = 0; b < n; ++b) {
        const TrainSample& s = train[order[start + b]];
        const CropWindow w = aligned_crop(s, patch, rng);
        ImageBuffer img = crop(s.image, w);
        if (cfg.augment) {
          const double br = rng.uniform(-cfg.brightness, cfg.brightness);
          const double ct = rng.uniform(cfg.contrast_min, cfg.contrast_max);
          img = augment_photometric(img, br, ct);
        }
        crops.push_back(std::move(img));
        fill_target(target, b, target_crop(s, w));
      }
      std::vector<const ImageBuffer*> ptrs;
      for (const auto& c : crops) ptrs.push_back(&c);

      nn::ForwardCache<float> cache;
      const nn::Tensor<float> pred = nn::network_forward(net, nn::images_to_tensor(ptrs), &cache);
      const auto loss = nn::mse_loss(pred, target);
      if (!std::isfinite(loss.loss)) throw Error(ErrorKind::numeric_error, "training loss is not finite");
      const nn::NetworkWeights grads = nn::network_backward(net, cache, loss.grad);
      nn::adam_step(net.parameters(), grads.parameters(), adam);
      loss_sum += loss.loss;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = adam.lr;
    rec.train_loss = loss_sum / batches;
    rec.val_loss = val.empty() ? std::numeric_limits<double>::quiet_NaN() : evaluate(net, val, val_windows);
    const double score = val.empty() ? rec.train_loss : rec.val_loss;
    if (score < best) {
      best = score;
      result.weights = net;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

TrainResult train_cnn3dw(const DatasetManifest& train, const DatasetManifest* val, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.entries.empty()) throw Error(ErrorKind::dataset_error, "manifest has no entries");
  std::vector<TrainSample> train_samples = load_samples(train);
  std::vector<TrainSample> val_samples;
  if (val) {
    val_samples = load_samples(*val);
  } else if (cfg.val_fraction > 0 && train_samples.size() > 1) {
    std::vector<int> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, 0x5b1));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(static_cast<std::uint64_t>(i))]);
    const std::size_t n_val =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.val_fraction * double(order.size()))));
    std::vector<TrainSample> kept;
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < n_val ? val_samples : kept).push_back(std::move(train_samples[order[i]]));
    train_samples = std::move(kept);
  }
  return train_cnn3dw(std::move(train_samples), std::move(val_samples), cfg, on_epoch);
}

void write_loss_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::write_error, "cannot write " + path.string());
  char line[64];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%d %.9g\n", r.epoch, r.train_loss);
    os << line;
  }
  if (!os) throw Error(ErrorKind::write_error, "failed writing " + path.string());
}

}  // namespace wmr
