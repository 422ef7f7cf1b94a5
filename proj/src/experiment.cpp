#include "wmr/experiment.hpp"

#include "wmr/augment.hpp"
#include "wmr/random.hpp"
#include "wmr/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wmr {

namespace fs = std::filesystem;

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error(ErrorKind::write_error, "cannot write " + path.string());
}

double f1(const BitCounts& c) {
  const long denom = 2 * c.tp + c.fn + c.fp;
  return denom ? 2.0 * double(c.tp) / double(denom) : 0.0;
}

ImageBuffer shifted(const ImageBuffer& img, const PhotometricShift& shift, std::uint64_t seed) {
  if (!shift.active()) return img;
  Rng rng(seed);
  const double b = rng.uniform(-shift.brightness, shift.brightness);
  const double c = rng.uniform(shift.contrast_min, shift.contrast_max);
  return augment_photometric(img, b, c);
}

struct TestItem {
  std::string name;
  ImageBuffer image;
  BitMatrix truth;
  ConfidenceMap map;  // oracle map or network output
};

// Decodes every item; a failed decode counts as an all-zero matrix and
// records the error kind.
MetricsReport score(const std::vector<TestItem>& items, const RetrievalParams& params) {
  MetricsReport report;
  for (const TestItem& t : items) {
    try {
      report.add(t.name, decode_confidence_map(t.image, t.map, params).bits, t.truth);
    } catch (const Error& e) {
      report.add(t.name, BitMatrix(t.truth.size()), t.truth, std::string(to_string(e.kind())));
    }
  }
  return report;
}

std::vector<TestItem> load_items(const DatasetManifest& m, const PhotometricShift& shift, std::uint64_t shift_seed,
                                 bool need_truth_map) {
  std::vector<TestItem> items;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const ManifestEntry& e = m.entries[i];
    TestItem t;
    t.name = e.image.stem().string();
    t.image = shifted(read_ppm(m.path_of(e.image)), shift, derive_seed(shift_seed, i));
    t.truth = read_bit_matrix(m.path_of(e.bits));
    if (need_truth_map) t.map = read_pgm(m.path_of(e.ground_truth));
    items.push_back(std::move(t));
  }
  return items;
}

void run_network(std::vector<TestItem>& items, const nn::NetworkWeights& w) {
  for (TestItem& t : items) t.map = nn::forward_cnn3dw(t.image, w);
}

nlohmann::json report_json(const ExperimentResult& r, const std::string& name, bool oracle) {
  const BitMetrics agg = r.report.aggregate();
  nlohmann::json images = nlohmann::json::array();
  for (const ImageResult& im : r.report.images)
    images.push_back({{"name", im.name},
                      {"status", im.status},
                      {"tp", im.metrics.counts.tp},
                      {"fn", im.metrics.counts.fn},
                      {"fp", im.metrics.counts.fp},
                      {"tn", im.metrics.counts.tn},
                      {"exact", im.exact}});
  nlohmann::json j = {{"name", name},
                      {"mode", oracle ? "oracle" : "trained"},
                      {"beta", r.beta},
                      {"best_epoch", r.best_epoch},
                      {"test_manifest", r.test_digest},
                      {"bit_accuracy", r.report.bit_accuracy()},
                      {"exact_match", r.report.exact_match_rate()},
                      {"failures", r.report.failures()},
                      {"images", images}};
  j["recall"] = agg.recall ? nlohmann::json(*agg.recall) : nlohmann::json(nullptr);
  j["precision"] = agg.precision ? nlohmann::json(*agg.precision) : nlohmann::json(nullptr);
  return j;
}

ExperimentResult result_from_json(const nlohmann::json& j, const fs::path& dir) {
  ExperimentResult r;
  r.dir = dir;
  r.beta = j.at("beta").get<double>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.test_digest = j.at("test_manifest").get<std::string>();
  for (const auto& im : j.at("images")) {
    ImageResult x;
    x.name = im.at("name").get<std::string>();
    x.status = im.at("status").get<std::string>();
    x.exact = im.at("exact").get<bool>();
    BitCounts c;
    c.tp = im.at("tp").get<long>();
    c.fn = im.at("fn").get<long>();
    c.fp = im.at("fp").get<long>();
    c.tn = im.at("tn").get<long>();
    x.metrics = metrics_from_counts(c);
    r.report.pooled += c;
    r.report.images.push_back(std::move(x));
  }
  return r;
}

std::string report_text(const ExperimentResult& r, const std::string& name, bool oracle) {
  std::ostringstream os;
  char beta[32];
  std::snprintf(beta, sizeof beta, "%.4f", r.beta);
  os << "experiment " << name << '\n'
     << "mode " << (oracle ? "oracle" : "trained") << '\n'
     << "beta " << beta << '\n'
     << "best_epoch " << r.best_epoch << '\n'
     << "test_manifest " << r.test_digest << '\n'
     << r.report.to_text();
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_argument, "experiment config: " + what); };
  if (train_count < 1 || val_count < 0 || test_count < 1) fail("dataset counts must be positive");
  if (!(texture_pool_fraction > 0 && texture_pool_fraction <= 1)) fail("texture_pool_fraction must lie in (0, 1]");
  if (!(dataset_fraction > 0 && dataset_fraction <= 1)) fail("dataset_fraction must lie in (0, 1]");
  if (external_fraction < 0 || external_fraction > 1) fail("external_fraction must lie in [0, 1]");
  if (test_shift.brightness < 0 || test_shift.brightness > 0.5 || test_shift.contrast_min < 0.5 ||
      test_shift.contrast_max > 2 || test_shift.contrast_min > test_shift.contrast_max)
    fail("test_shift outside the photometric augmentation ranges");
  for (double b : beta_candidates)
    if (!(b > 0 && b <= 1)) fail("beta candidates must lie in (0, 1]");
  tmpl.validate();
  train.validate();
  retrieval.validate();
  if (retrieval.m != tmpl.bits.size()) fail("retrieval m differs from template m");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"name", c.name},
       {"template", c.tmpl},
       {"train_count", c.train_count},
       {"val_count", c.val_count},
       {"test_count", c.test_count},
       {"seed", c.seed},
       {"train", c.train},
       {"retrieval", c.retrieval},
       {"beta_candidates", c.beta_candidates},
       {"test_shift",
        {{"brightness", c.test_shift.brightness},
         {"contrast_min", c.test_shift.contrast_min},
         {"contrast_max", c.test_shift.contrast_max}}},
       {"texture_pool_fraction", c.texture_pool_fraction},
       {"dataset_fraction", c.dataset_fraction},
       {"external_fraction", c.external_fraction}};
  if (c.external_manifest) j["external_manifest"] = c.external_manifest->generic_string();
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  auto opt = [&j](const char* key, auto& out) {
    if (j.contains(key)) j.at(key).get_to(out);
  };
  opt("name", c.name);
  opt("template", c.tmpl);
  opt("train_count", c.train_count);
  opt("val_count", c.val_count);
  opt("test_count", c.test_count);
  opt("seed", c.seed);
  opt("train", c.train);
  opt("retrieval", c.retrieval);
  opt("beta_candidates", c.beta_candidates);
  if (j.contains("test_shift")) {
    const auto& s = j.at("test_shift");
    if (s.contains("brightness")) s.at("brightness").get_to(c.test_shift.brightness);
    if (s.contains("contrast_min")) s.at("contrast_min").get_to(c.test_shift.contrast_min);
    if (s.contains("contrast_max")) s.at("contrast_max").get_to(c.test_shift.contrast_max);
  }
  opt("texture_pool_fraction", c.texture_pool_fraction);
  opt("dataset_fraction", c.dataset_fraction);
  opt("external_fraction", c.external_fraction);
  if (j.contains("external_manifest")) c.external_manifest = j.at("external_manifest").get<std::string>();
  if (!j.contains("retrieval") || !j.at("retrieval").contains("m")) c.retrieval.m = c.tmpl.bits.size();
}

ExperimentConfig read_experiment_config(const fs::path& path) {
  ExperimentConfig c;
  try {
    c = read_json(path).get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  if (c.external_manifest && c.external_manifest->is_relative()) c.external_manifest = base / *c.external_manifest;
  if (c.train.init_weights && c.train.init_weights->is_relative()) c.train.init_weights = base / *c.train.init_weights;
  if (!c.tmpl.background_dir.empty() && c.tmpl.background_dir.is_relative())
    c.tmpl.background_dir = base / c.tmpl.background_dir;
  c.validate();
  return c;
}

std::vector<TextureFamily> texture_subset(const std::vector<TextureFamily>& pool, double fraction,
                                          std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorKind::invalid_argument, "empty texture pool");
  std::vector<TextureFamily> shuffled = pool;
  Rng rng(derive_seed(seed, 0x7e5));
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.below(static_cast<std::uint64_t>(i))]);
  const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * double(pool.size()) - 1e-9)),
                                         1, pool.size());
  shuffled.resize(n);
  // Keep the template's order so the subset reads naturally in configs.
  std::vector<TextureFamily> out;
  for (TextureFamily f : pool)
    if (std::find(shuffled.begin(), shuffled.end(), f) != shuffled.end()) out.push_back(f);
  return out;
}

DatasetManifest cached_dataset(const SceneTemplate& tmpl, int count, std::uint64_t seed, const fs::path& data_root) {
  const nlohmann::json key = {{"template", tmpl}, {"count", count}, {"seed", seed}, {"version", kGeneratorVersion}};
  const fs::path dir = data_root / ("set-" + fnv1a_hex(key.dump()));
  if (fs::exists(dir / "manifest.json")) {
    DatasetManifest m = read_manifest(dir / "manifest.json");
    if (static_cast<int>(m.entries.size()) == count && m.seed == seed && m.generator_version == kGeneratorVersion)
      return m;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return generate_dataset(tmpl, count, seed, dir);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, const RunOptions& opts) {
  cfg.validate();
  fs::create_directories(out_dir);
  fs::remove(out_dir / "FAILED");
  const auto t0 = std::chrono::steady_clock::now();
  std::ofstream log(out_dir / "run.log");
  auto note = [&](const std::string& line) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "[%8.1fs] ", s);
    log << stamp << line << std::endl;
    if (opts.verbose) std::cerr << stamp << cfg.name << ": " << line << std::endl;
  };

  try {
    write_json(out_dir / "config.json", nlohmann::json(cfg));
    const fs::path data_root = opts.data_root.value_or(out_dir / "data");
    const std::uint64_t train_seed = derive_seed(cfg.seed, 1), val_seed = derive_seed(cfg.seed, 2),
                        test_seed = derive_seed(cfg.seed, 3);

    ExperimentResult result;
    result.dir = out_dir;
    note("generating test set");
    const DatasetManifest test = cached_dataset(cfg.tmpl, cfg.test_count, test_seed, data_root);
    result.test_digest = manifest_digest(test);
    std::vector<TestItem> items = load_items(test, cfg.test_shift, derive_seed(test_seed, 0x5f1), opts.oracle);

    if (opts.oracle) {
      result.beta = cfg.retrieval.beta;
      result.report = score(items, cfg.retrieval);
    } else {
      SceneTemplate train_tmpl = cfg.tmpl;
      train_tmpl.texture_pool = texture_subset(cfg.tmpl.texture_pool, cfg.texture_pool_fraction, cfg.seed);
      note("generating training and validation sets");
      DatasetManifest train = cached_dataset(train_tmpl, cfg.train_count, train_seed, data_root);
      const int n_train = std::max(1, static_cast<int>(std::lround(cfg.dataset_fraction * cfg.train_count)));
      train.entries.resize(static_cast<std::size_t>(n_train));
      std::vector<TrainSample> train_samples = load_samples(train);
      if (cfg.external_manifest && cfg.external_fraction > 0) {
        DatasetManifest ext = read_manifest(*cfg.external_manifest);
        const auto n_ext = static_cast<std::size_t>(std::lround(cfg.external_fraction * double(ext.entries.size())));
        ext.entries.resize(std::min(n_ext, ext.entries.size()));
        for (TrainSample& s : load_samples(ext)) train_samples.push_back(std::move(s));
      }
      std::vector<TrainSample> val_samples;
      DatasetManifest val;
      if (cfg.val_count > 0) {
        val = cached_dataset(train_tmpl, cfg.val_count, val_seed, data_root);
        val_samples = load_samples(val);
      }

      note("training on " + std::to_string(train_samples.size()) + " images");
      TrainConfig tc = cfg.train;
      const TrainResult tr = train_cnn3dw(std::move(train_samples), std::move(val_samples), tc,
                                          [&](const EpochRecord& r) {
                                            char line[160];
                                            std::snprintf(line, sizeof line,
                                                          "epoch %d lr %.1e train %.6f val %.6f", r.epoch, r.lr,
                                                          r.train_loss, r.val_loss);
                                            note(line);
                                          });
      result.best_epoch = tr.best_epoch;
      nn::write_weights(out_dir / "weights.bin", tr.weights);
      write_loss_curve(out_dir / "loss_curve.txt", tr.history);
      {
        std::ostringstream vc;
        char line[64];
        for (const auto& r : tr.history) {
          std::snprintf(line, sizeof line, "%d %.9g\n", r.epoch, r.val_loss);
          vc << line;
        }
        write_text(out_dir / "val_curve.txt", vc.str());
      }

      RetrievalParams params = cfg.retrieval;
      if (!cfg.beta_candidates.empty() && cfg.val_count > 0) {
        std::vector<TestItem> val_items = load_items(val, PhotometricShift{}, 0, false);
        run_network(val_items, tr.weights);
        double best = -1.0;
        for (double b : cfg.beta_candidates) {
          RetrievalParams p = params;
          p.beta = b;
          const double score_b = f1(score(val_items, p).pooled);
          char line[96];
          std::snprintf(line, sizeof line, "validation beta %.3f F1 %.4f", b, score_b);
          note(line);
          if (score_b > best) {
            best = score_b;
            params.beta = b;
          }
        }
      }
      result.beta = params.beta;
      note("decoding test set");
      run_network(items, tr.weights);
      result.report = score(items, params);
    }

    write_text(out_dir / "report.txt", report_text(result, cfg.name, opts.oracle));
    write_json(out_dir / "report.json", report_json(result, cfg.name, opts.oracle));
    const BitMetrics agg = result.report.aggregate();
    note("recall " + format_metric(agg.recall) + " precision " + format_metric(agg.precision));
    return result;
  } catch (const std::exception& e) {
    write_text(out_dir / "FAILED", std::string(e.what()) + "\n");
    note(std::string("FAILED: ") + e.what());
    throw;
  }
}

ExperimentResult cached_experiment(const ExperimentConfig& cfg, const fs::path& runs_dir, const RunOptions& opts) {
  const fs::path dir = runs_dir / ("run-" + fnv1a_hex(nlohmann::json(cfg).dump()));
  if (fs::exists(dir / "report.json") && !fs::exists(dir / "FAILED"))
    return result_from_json(read_json(dir / "report.json"), dir);
  return run_experiment(cfg, dir, opts);
}

AblationAxis ablation_axis_from_string(const std::string& s) {
  if (s == "dataset_size") return AblationAxis::dataset_size;
  if (s == "texture_pool") return AblationAxis::texture_pool;
  if (s == "augmentation") return AblationAxis::augmentation;
  throw Error(ErrorKind::invalid_argument, "unknown ablation axis '" + s + "'");
}

std::string_view to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::dataset_size: return "dataset_size";
    case AblationAxis::texture_pool: return "texture_pool";
    case AblationAxis::augmentation: return "augmentation";
  }
  return "?";
}

ExperimentConfig ablation_config(const ExperimentConfig& base, AblationAxis axis, double level) {
  ExperimentConfig c = base;
  switch (axis) {
    case AblationAxis::dataset_size:
      c.dataset_fraction = level;
      break;
    case AblationAxis::texture_pool:
      c.texture_pool_fraction = level;
      break;
    case AblationAxis::augmentation:
      if (level != 0.0 && level != 1.0) throw Error(ErrorKind::invalid_argument, "augmentation levels are 0 or 1");
      c.train.augment = level != 0.0;
      break;
  }
  return c;
}

AblationResult run_ablation(const ExperimentConfig& base, AblationAxis axis, const std::vector<double>& levels,
                            const fs::path& out_dir, const RunOptions& opts) {
  if (levels.size() < 2) throw Error(ErrorKind::invalid_argument, "an ablation needs at least two levels");
  RunOptions run_opts = opts;
  run_opts.oracle = false;
  if (!run_opts.data_root) run_opts.data_root = out_dir / "data";

  AblationResult out;
  out.axis = axis;
  for (double level : levels) {
    ExperimentConfig c = ablation_config(base, axis, level);
    c.name = base.name;
    AblationLevel l;
    l.level = level;
    l.result = cached_experiment(c, out_dir / "runs", run_opts);
    out.levels.push_back(std::move(l));
  }
  out.shared_test_set = std::all_of(out.levels.begin(), out.levels.end(), [&](const AblationLevel& l) {
    return l.result.test_digest == out.levels.front().result.test_digest;
  });
  out.monotone_recall = true;
  for (std::size_t i = 1; i < out.levels.size(); ++i)
    if (out.levels[i].result.report.aggregate().recall.value_or(0.0) <
        out.levels[i - 1].result.report.aggregate().recall.value_or(0.0))
      out.monotone_recall = false;
  write_text(out_dir / (std::string(to_string(axis)) + ".txt"), out.to_text());
  return out;
}

std::string AblationResult::to_text() const {
  std::ostringstream os;
  char line[200];
  os << "axis " << to_string(axis) << '\n';
  std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %8s %s\n", "level", "recall", "precision", "bit_acc", "beta",
                "run");
  os << line;
  for (const AblationLevel& l : levels) {
    const BitMetrics m = l.result.report.aggregate();
    std::snprintf(line, sizeof line, "%-8g %10s %10s %10.4f %8.3f %s\n", l.level, format_metric(m.recall).c_str(),
                  format_metric(m.precision).c_str(), l.result.report.bit_accuracy(), l.result.beta,
                  l.result.dir.filename().string().c_str());
    os << line;
  }
  if (!levels.empty()) {
    const BitMetrics first = levels.front().result.report.aggregate(), last = levels.back().result.report.aggregate();
    std::snprintf(line, sizeof line, "delta_recall(last-first) %+.4f  delta_precision(last-first) %+.4f\n",
                  last.recall.value_or(0) - first.recall.value_or(0),
                  last.precision.value_or(0) - first.precision.value_or(0));
    os << line;
  }
  os << "shared_test_set " << (shared_test_set ? "yes" : "no") << '\n'
     << "monotone_recall " << (monotone_recall ? "yes" : "no") << '\n';
  return os.str();
}

}  // namespace wmr
