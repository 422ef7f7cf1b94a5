// Command-line front end: dataset generation, training, inference,
// decoding and experiments.

#include "wmr/dataset.hpp"
#include "wmr/experiment.hpp"
#include "wmr/overlay.hpp"
#include "wmr/retrieve.hpp"
#include "wmr/serialize.hpp"
#include "wmr/train.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace wmr;

namespace {

enum Exit { ok = 0, bad_args = 2, data = 3, retrieval = 4, internal = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::invalid_layout:
      return bad_args;
    case ErrorKind::landmark_not_found:
    case ErrorKind::landmark_ambiguous:
    case ErrorKind::degenerate_configuration:
    case ErrorKind::insufficient_points:
      return retrieval;
    case ErrorKind::numeric_error:
      return internal;
    default:
      return data;
  }
}

SceneTemplate load_template(const fs::path& path) {
  try {
    SceneTemplate t = read_json(path).get<SceneTemplate>();
    if (!t.background_dir.empty() && t.background_dir.is_relative()) t.background_dir = path.parent_path() / t.background_dir;
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, path.string() + ": " + e.what());
  }
}

// Accepts a bare training config or an experiment config with a "train" key.
TrainConfig load_train_config(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  try {
    TrainConfig c = (j.contains("train") ? j.at("train") : j).get<TrainConfig>();
    if (c.init_weights && c.init_weights->is_relative()) c.init_weights = path.parent_path() / *c.init_weights;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_argument, path.string() + ": " + e.what());
  }
}

std::vector<double> parse_levels(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_argument, "bad level '" + item + "'");
    }
  }
  return out;
}

void print_metrics(const ExperimentResult& r) {
  const BitMetrics m = r.report.aggregate();
  std::cout << "recall " << format_metric(m.recall) << " precision " << format_metric(m.precision)
            << " bit_accuracy " << r.report.bit_accuracy() << " exact_match " << r.report.exact_match_rate()
            << "\nreport " << (r.dir / "report.txt").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Watermark retrieval from images of 3D printed plates"};
  app.require_subcommand(1);

  fs::path template_path, out_dir, manifest_path, config_path, weights_path, image_path, map_path, params_path,
      out_path, diag_dir;
  int count = 0;
  std::uint64_t seed = 0;
  bool deterministic = false, oracle = false;
  std::string axis, levels;

  auto* gen = app.add_subcommand("gen", "Render a synthetic dataset");
  gen->add_option("--template", template_path, "Scene template (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--count", count, "Number of images")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Dataset seed")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train CNN-3DW on a manifest");
  train->add_option("--manifest", manifest_path, "Dataset manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--config", config_path, "Training config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Weights file")->required();
  train->add_flag("--deterministic", deterministic, "Single fixed reduction order");

  auto* infer = app.add_subcommand("infer", "Write the network confidence map");
  infer->add_option("--weights", weights_path)->required()->check(CLI::ExistingFile);
  infer->add_option("--image", image_path)->required()->check(CLI::ExistingFile);
  infer->add_option("--out", out_path, "Map (PGM)")->required();

  auto* decode = app.add_subcommand("decode", "Decode bits from an image and a confidence map");
  decode->add_option("--image", image_path)->required()->check(CLI::ExistingFile);
  decode->add_option("--map", map_path, "Confidence map (PGM)")->required()->check(CLI::ExistingFile);
  decode->add_option("--params", params_path, "Retrieval params (JSON)")->required()->check(CLI::ExistingFile);
  decode->add_option("--out", out_path, "Bit matrix (text)")->required();
  decode->add_option("--diagnostics", diag_dir, "Directory for per-stage rasters");

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Network inference followed by decoding");
  retrieve_cmd->add_option("--weights", weights_path)->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--image", image_path)->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--params", params_path)->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--out", out_path)->required();

  auto* eval = app.add_subcommand("eval", "Run an experiment: generate, train, decode, score");
  eval->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out_dir)->required();
  eval->add_flag("--oracle", oracle, "Decode ground-truth maps instead of training");

  auto* ablate = app.add_subcommand("ablate", "Compare experiment variants along one axis");
  ablate->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  ablate->add_option("--axis", axis, "dataset_size | texture_pool | augmentation")->required();
  ablate->add_option("--levels", levels, "Comma-separated levels")->required();
  ablate->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : bad_args;
  }

  try {
    if (*gen) {
      const DatasetManifest m = generate_dataset(load_template(template_path), count, seed, out_dir);
      std::cout << (out_dir / "manifest.json").string() << ' ' << manifest_digest(m) << '\n';
    } else if (*train) {
      TrainConfig cfg = load_train_config(config_path);
      if (deterministic) cfg.deterministic = true;
      const DatasetManifest m = read_manifest(manifest_path);
      const TrainResult r = train_cnn3dw(m, nullptr, cfg, [](const EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << " lr " << e.lr << " train " << e.train_loss << " val " << e.val_loss
                  << '\n';
      });
      nn::write_weights(out_path, r.weights);
      write_loss_curve(fs::path(out_path).concat(".loss.txt"), r.history);
      std::cout << "best epoch " << r.best_epoch << '\n';
    } else if (*infer) {
      write_pgm(out_path, nn::forward_cnn3dw(read_ppm(image_path), nn::read_weights(weights_path)));
    } else if (*decode) {
      const ImageBuffer img = read_ppm(image_path);
      const RetrievalResult r = decode_confidence_map(img, read_pgm(map_path), read_retrieval_params(params_path));
      write_bit_matrix(out_path, r.bits);
      if (!diag_dir.empty()) {
        const std::string stem = image_path.stem().string();
        write_diagnostics(diag_dir, stem, r.diagnostics);
        overlay_diagnostics(img, r.diagnostics, diag_dir / (stem + ".overlay.ppm"));
      }
    } else if (*retrieve_cmd) {
      const RetrievalResult r =
          retrieve(read_ppm(image_path), nn::read_weights(weights_path), read_retrieval_params(params_path));
      write_bit_matrix(out_path, r.bits);
    } else if (*eval) {
      RunOptions opts;
      opts.oracle = oracle;
      print_metrics(run_experiment(read_experiment_config(config_path), out_dir, opts));
    } else if (*ablate) {
      const AblationResult r = run_ablation(read_experiment_config(config_path), ablation_axis_from_string(axis),
                                            parse_levels(levels), out_dir);
      std::cout << r.to_text();
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return internal;
  }
  return ok;
}
