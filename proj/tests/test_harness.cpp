#include "support.hpp"

#include "wmr/experiment.hpp"
#include "wmr/overlay.hpp"
#include "wmr/serialize.hpp"

#include <cstdlib>
#include <sys/wait.h>

using namespace wmr;
namespace fs = std::filesystem;

namespace {

BitMatrix from_rows(std::initializer_list<const char*> rows) {
  BitMatrix b(int(rows.size()));
  int i = 0;
  for (const char* r : rows) {
    for (int j = 0; r[j]; ++j) b.set(i, j, r[j] == '1');
    ++i;
  }
  return b;
}

// Small, fast experiment: tiny renders and a narrow network.
ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.name = "tiny";
  c.tmpl.render_height = 64;
  c.tmpl.render_width = 64;
  c.tmpl.supersample = 1;
  c.train_count = 4;
  c.val_count = 2;
  c.test_count = 2;
  c.seed = 3;
  c.train.epochs = 2;
  c.train.drop_epoch = 1;
  c.train.patch_size = 32;
  c.train.architecture.channels = {4, 4, 4, 4, 1};
  return c;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(WMR_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("bit metrics fixtures") {
  const BitMatrix truth = random_bit_matrix(6, 4);
  const BitMetrics same = bit_metrics(truth, truth);
  CHECK(same.recall == 1.0);
  CHECK(same.precision == 1.0);

  // 12 ones in truth; prediction hits 10, misses 2, adds 5.
  const BitMatrix t = from_rows({"111100", "111100", "111100", "000000", "000000", "000000"});
  const BitMatrix p = from_rows({"111100", "111100", "110000", "111110", "000000", "000000"});
  const BitMetrics m = bit_metrics(p, t);
  CHECK(m.counts.tp == 10);
  CHECK(m.counts.fn == 2);
  CHECK(m.counts.fp == 5);
  CHECK(*m.recall == 10.0 / 12.0);
  CHECK(*m.precision == 10.0 / 15.0);

  const BitMetrics none = bit_metrics(BitMatrix(4), BitMatrix(4));
  CHECK_FALSE(none.recall.has_value());
  CHECK_FALSE(none.precision.has_value());
  CHECK(format_metric(none.recall) == "undefined");
  CHECK_ERROR_KIND(bit_metrics(BitMatrix(4), BitMatrix(5)), ErrorKind::invalid_argument);
}

TEST_CASE("bit metric identities") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const BitMatrix a = random_bit_matrix(8, s), b = random_bit_matrix(8, s + 1000);
    const BitMetrics m = bit_metrics(a, b);
    CHECK(m.counts.total() == 64);
    CHECK(m.counts.tp + m.counts.fn == b.count_ones());
    CHECK(m.counts.tp + m.counts.fp == a.count_ones());
    // Swapping prediction and truth swaps recall and precision.
    const BitMetrics r = bit_metrics(b, a);
    CHECK(r.recall == m.precision);
    CHECK(r.precision == m.recall);
  }
}

TEST_CASE("metrics pool counts across images") {
  MetricsReport rep;
  const BitMatrix t = from_rows({"11", "00"});
  rep.add("a", from_rows({"10", "00"}), t);
  rep.add("b", from_rows({"11", "01"}), t);
  rep.add("c", BitMatrix(2), t, "landmark-not-found");
  const BitMetrics agg = rep.aggregate();
  CHECK(agg.counts.tp == 3);
  CHECK(agg.counts.fn == 3);
  CHECK(agg.counts.fp == 1);
  CHECK(*agg.recall == 0.5);
  CHECK(*agg.precision == 0.75);
  CHECK(rep.failures() == 1);
  CHECK(rep.exact_match_rate() == 0.0);
  CHECK(rep.bit_accuracy() == doctest::Approx(8.0 / 12.0));
  CHECK(rep.to_text().find("landmark-not-found") != std::string::npos);
}

TEST_CASE("texture subsets") {
  const auto pool = all_texture_families();
  CHECK(texture_subset(pool, 1.0, 1).size() == pool.size());
  const auto half = texture_subset(pool, 0.5, 1);
  CHECK(half.size() == 6);
  CHECK(half == texture_subset(pool, 0.5, 1));
  CHECK(texture_subset(pool, 0.01, 1).size() == 1);
  for (auto f : half) CHECK(std::find(pool.begin(), pool.end(), f) != pool.end());
}

TEST_CASE("ablation configs change one axis") {
  const ExperimentConfig base = tiny_experiment();
  CHECK(ablation_config(base, AblationAxis::dataset_size, 0.25).dataset_fraction == 0.25);
  CHECK(ablation_config(base, AblationAxis::texture_pool, 0.5).texture_pool_fraction == 0.5);
  CHECK_FALSE(ablation_config(base, AblationAxis::augmentation, 0).train.augment);
  CHECK(ablation_config(base, AblationAxis::augmentation, 1).train.augment);
  CHECK_ERROR_KIND(ablation_config(base, AblationAxis::augmentation, 0.5), ErrorKind::invalid_argument);
  CHECK(ablation_axis_from_string("texture_pool") == AblationAxis::texture_pool);
  CHECK_ERROR_KIND(ablation_axis_from_string("colour"), ErrorKind::invalid_argument);
}

TEST_CASE("experiment config JSON round trip") {
  ExperimentConfig c = tiny_experiment();
  c.beta_candidates = {0.35, 0.7};
  c.test_shift.brightness = 0.1;
  const ExperimentConfig back = nlohmann::json(c).get<ExperimentConfig>();
  CHECK(nlohmann::json(back) == nlohmann::json(c));
  ExperimentConfig bad = c;
  bad.retrieval.m = 10;
  CHECK_ERROR_KIND(bad.validate(), ErrorKind::invalid_argument);
}

TEST_CASE("oracle experiment decodes every scene") {
  test::TempDir dir("oracle");
  ExperimentConfig c;
  c.name = "oracle";
  c.test_count = 3;
  c.seed = 9;
  RunOptions opts;
  opts.oracle = true;
  opts.verbose = false;
  const ExperimentResult r = run_experiment(c, dir.path(), opts);
  const BitMetrics m = r.report.aggregate();
  CHECK(*m.recall == 1.0);
  CHECK(*m.precision == 1.0);
  CHECK(r.report.exact_match_rate() == 1.0);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("overlay panels") {
  const SceneTemplate t;
  const Frame f = render_frame(t, 3, 8);
  const RetrievalResult r = decode_confidence_map(f.image, f.ground_truth, RetrievalParams{});
  const ImageBuffer o = overlay_panels(f.image, r.diagnostics);
  CHECK(o.height == 640);
  CHECK(o.width == 4 * 640);
  CHECK(int(r.diagnostics.accepted.size()) == f.bits.count_ones());
  int red = 0;
  for (int y = 0; y < 640; ++y)
    for (int x = 3 * 640; x < 4 * 640; ++x) {
      const auto p = o.pixel(y, x);
      red += p(0) == 1.0f && p(1) == 0.0f && p(2) == 0.0f;
    }
  CHECK(red > 0);

  RetrievalDiagnostics empty = r.diagnostics;
  empty.accepted.clear();
  const ImageBuffer e = overlay_panels(f.image, empty);
  for (int y = 0; y < 640; y += 7)
    for (int x = 0; x < 640; x += 7) REQUIRE(e.pixel(y, 3 * 640 + x).isApprox(e.pixel(y, 2 * 640 + x)));
  CHECK(overlay_panels(f.image, empty).pixels.isApprox(e.pixels));
  CHECK_ERROR_KIND(overlay_panels(f.image, RetrievalDiagnostics{}), ErrorKind::invalid_argument);

  test::TempDir dir("overlay");
  write_diagnostics(dir.path(), "s", r.diagnostics);
  CHECK(fs::exists(dir / "s.map.pgm"));
  CHECK(fs::exists(dir / "s.bin.pgm"));
  CHECK(fs::exists(dir / "s.ctr.ppm"));
}

TEST_CASE("trained experiment writes reproducible artifacts") {
  test::TempDir a("exp-a"), b("exp-b");
  RunOptions opts;
  opts.verbose = false;
  const ExperimentConfig c = tiny_experiment();
  const ExperimentResult ra = run_experiment(c, a.path(), opts);
  const ExperimentResult rb = run_experiment(c, b.path(), opts);
  for (const char* f : {"config.json", "weights.bin", "loss_curve.txt", "report.txt", "report.json"}) {
    REQUIRE(fs::exists(a / f));
    CHECK_MESSAGE(test::slurp(a / f) == test::slurp(b / f), f);
  }
  CHECK(ra.test_digest == rb.test_digest);
  CHECK(ra.report.images.size() == 2);
}

TEST_CASE("failed experiments leave a marker") {
  test::TempDir dir("exp-fail");
  ExperimentConfig c = tiny_experiment();
  c.external_manifest = dir / "missing" / "manifest.json";
  c.external_fraction = 0.5;
  RunOptions opts;
  opts.verbose = false;
  CHECK_THROWS(run_experiment(c, dir / "run", opts));
  CHECK(fs::exists(dir / "run" / "FAILED"));
}

}

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  test::TempDir dir("cli");
  const fs::path log = dir / "log.txt";
  CHECK(run_cli("", log) == 2);
  CHECK(run_cli("--help", log) == 0);
  CHECK(run_cli("gen --template " + (dir / "none.json").string() + " --count 1 --seed 1 --out x", log) == 2);

  write_json(dir / "tmpl.json", {{"render_height", 32}, {"render_width", 32}, {"supersample", 1}});
  CHECK(run_cli("gen --template " + (dir / "tmpl.json").string() + " --count 0 --seed 1 --out x", log) == 2);
  const fs::path data = dir / "data";
  REQUIRE(run_cli("gen --template " + (dir / "tmpl.json").string() + " --count 2 --seed 1 --out " + data.string(), log) == 0);
  CHECK(fs::exists(data / "manifest.json"));

  write_json(dir / "bad_tmpl.json", {{"render_height", -3}});
  CHECK(run_cli("gen --template " + (dir / "bad_tmpl.json").string() + " --count 1 --seed 1 --out " +
                    (dir / "x").string(), log) == 2);

  // A gray image has no landmarks.
  ImageBuffer gray(32, 32);
  gray.pixels.setConstant(0.5f);
  write_ppm(dir / "gray.ppm", gray);
  write_pgm(dir / "map.pgm", ConfidenceMap::Zero(8, 8));
  write_json(dir / "params.json", nlohmann::json::object());
  CHECK(run_cli("decode --image " + (dir / "gray.ppm").string() + " --map " + (dir / "map.pgm").string() +
                    " --params " + (dir / "params.json").string() + " --out " + (dir / "bits.txt").string(), log) == 4);
  write_json(dir / "bad_params.json", {{"beta", 2.0}});
  CHECK(run_cli("decode --image " + (dir / "gray.ppm").string() + " --map " + (dir / "map.pgm").string() +
                    " --params " + (dir / "bad_params.json").string() + " --out " + (dir / "bits.txt").string(), log) == 2);

  { std::ofstream(dir / "junk.bin") << "junk"; }
  CHECK(run_cli("infer --weights " + (dir / "junk.bin").string() + " --image " + (dir / "gray.ppm").string() +
                    " --out " + (dir / "m.pgm").string(), log) == 3);

  nn::write_weights(dir / "w.bin", nn::init_network<float>(1));
  CHECK(run_cli("infer --weights " + (dir / "w.bin").string() + " --image " + (dir / "gray.ppm").string() +
                    " --out " + (dir / "m.pgm").string(), log) == 0);
  CHECK(read_pgm(dir / "m.pgm").rows() == 8);
  CHECK(run_cli("retrieve --weights " + (dir / "w.bin").string() + " --image " + (dir / "gray.ppm").string() +
                    " --params " + (dir / "params.json").string() + " --out " + (dir / "b.txt").string(), log) == 4);
  CHECK(run_cli("ablate --config " + (dir / "params.json").string() + " --axis colour --levels 1 --out " +
                    (dir / "abl").string(), log) == 2);
}

TEST_CASE("train subcommand writes weights and a loss curve") {
  test::TempDir dir("cli-train");
  const fs::path log = dir / "log.txt";
  write_json(dir / "tmpl.json", {{"render_height", 32}, {"render_width", 32}, {"supersample", 1}});
  REQUIRE(run_cli("gen --template " + (dir / "tmpl.json").string() + " --count 3 --seed 2 --out " +
                      (dir / "data").string(), log) == 0);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.drop_epoch = 1;
  cfg.patch_size = 16;
  cfg.val_fraction = 0.0;
  cfg.architecture.channels = {4, 4, 4, 4, 1};
  write_json(dir / "train.json", cfg);
  CHECK(run_cli("train --manifest " + (dir / "data" / "manifest.json").string() + " --config " +
                    (dir / "train.json").string() + " --out " + (dir / "w.bin").string() + " --deterministic", log) == 0);
  CHECK(nn::read_weights(dir / "w.bin").architecture() == cfg.architecture);
  CHECK(test::slurp(dir / "w.bin.loss.txt").find("1 ") != std::string::npos);
}

}
