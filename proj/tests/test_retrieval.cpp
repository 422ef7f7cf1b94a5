#include "support.hpp"
#include "oracles.hpp"

#include "wmr/dataset.hpp"
#include "wmr/decode.hpp"
#include "wmr/homography.hpp"
#include "wmr/kmeans.hpp"
#include "wmr/landmarks.hpp"
#include "wmr/random.hpp"
#include "wmr/regions.hpp"
#include "wmr/render.hpp"
#include "wmr/retrieve.hpp"
#include "wmr/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace wmr;

namespace {

ConfidenceMap disc(int h, int w, double cx, double cy, double r) {
  ConfidenceMap m = ConfidenceMap::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x - cx, y - cy) <= r) m(y, x) = 1.0f;
  return m;
}

Quad random_quad(Rng& rng, double scale) {
  // A jittered square keeps the quad convex and well away from collinearity.
  const double cx = rng.uniform(-scale, scale), cy = rng.uniform(-scale, scale), s = rng.uniform(0.2, 1.0) * scale;
  Quad q = {Eigen::Vector2d(cx - s, cy - s), Eigen::Vector2d(cx + s, cy - s), Eigen::Vector2d(cx + s, cy + s),
            Eigen::Vector2d(cx - s, cy + s)};
  for (auto& p : q) p += Eigen::Vector2d(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) * s;
  return q;
}

// Cell centers of the 1-bits of `bits` in the registered square.
std::vector<Eigen::Vector2d> grid_centroids(const BitMatrix& bits, const GridLayout& layout, double S) {
  std::vector<Eigen::Vector2d> out;
  for (int i = 0; i < bits.size(); ++i)
    for (int j = 0; j < bits.size(); ++j)
      if (bits(i, j)) out.push_back(registered_cell_center(bits.size(), layout, i, j, S));
  return out;
}

double exhaustive_inertia(std::vector<double> v, int k) {
  std::sort(v.begin(), v.end());
  const int n = int(v.size());
  auto cost = [&](int a, int b) {
    double mean = 0;
    for (int i = a; i < b; ++i) mean += v[i];
    mean /= (b - a);
    double c = 0;
    for (int i = a; i < b; ++i) c += (v[i] - mean) * (v[i] - mean);
    return c;
  };
  // Optimal 1-D clusters are contiguous in sorted order.
  double best = INFINITY;
  if (k == 1) return cost(0, n);
  if (k == 2) {
    for (int a = 1; a < n; ++a) best = std::min(best, cost(0, a) + cost(a, n));
    return best;
  }
  for (int a = 1; a < n; ++a)
    for (int b = a + 1; b < n; ++b) best = std::min(best, cost(0, a) + cost(a, b) + cost(b, n));
  return best;
}

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("homography fixtures") {
  const Quad unit = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)};
  CHECK(estimate_homography(unit, unit).matrix.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  Quad moved = unit;
  for (auto& p : moved) p += Eigen::Vector2d(5, 7);
  const Homography t = estimate_homography(unit, moved);
  CHECK(t.matrix.col(2).isApprox(Eigen::Vector3d(5, 7, 1), 1e-12));
  CHECK(t.matrix.leftCols(2).isApprox(Eigen::Matrix3d::Identity().leftCols(2), 1e-12));

  Quad line = unit;
  line[2] = Eigen::Vector2d(2, 0);
  CHECK_ERROR_KIND(estimate_homography(line, unit), ErrorKind::degenerate_configuration);
  CHECK_ERROR_KIND(estimate_homography(unit, line), ErrorKind::degenerate_configuration);
}

TEST_CASE("homography maps random quads exactly") {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const Quad src = random_quad(rng, 300), dst = random_quad(rng, 300);
    const Homography h = estimate_homography(src, dst);
    for (int i = 0; i < 4; ++i) REQUIRE((h.apply(src[i]) - dst[i]).norm() <= 1e-9);
    for (int i = 0; i < 4; ++i) REQUIRE((h.inverse().apply(dst[i]) - src[i]).norm() <= 1e-9);
  }
}

TEST_CASE("warp fixtures") {
  Rng rng(12);
  ConfidenceMap m(16, 16);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = float(rng.uniform());
  CHECK((warp_map(m, Homography{}, 16) == m).all());

  Homography shift;
  shift.matrix(0, 2) = 3;
  shift.matrix(1, 2) = 2;
  const ConfidenceMap w = warp_map(m, shift, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) REQUIRE(w(y, x) == (x >= 3 && y >= 2 ? m(y - 2, x - 3) : 0.0f));
}

TEST_CASE("warp round trip loses little in the interior") {
  const int n = 128;
  ConfidenceMap m(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) m(y, x) = float(0.5 + 0.25 * std::sin(x / 9.0) * std::cos(y / 7.0));
  const Quad src = {Eigen::Vector2d(10, 14), Eigen::Vector2d(118, 6), Eigen::Vector2d(112, 120), Eigen::Vector2d(4, 110)};
  const Quad dst = {Eigen::Vector2d(0, 0), Eigen::Vector2d(n, 0), Eigen::Vector2d(n, n), Eigen::Vector2d(0, n)};
  const Homography h = estimate_homography(src, dst);
  const ConfidenceMap back = warp_map(warp_map(m, h, n), h.inverse(), n);
  double worst = 0;
  for (int y = 24; y < 100; ++y)
    for (int x = 24; x < 100; ++x) worst = std::max(worst, double(std::abs(back(y, x) - m(y, x))));
  CHECK(worst <= 0.02);
}

TEST_CASE("otsu matches the exhaustive oracle") {
  Rng rng(13);
  for (int k = 0; k < 300; ++k) {
    const int h = 4 + rng.below(60), w = 4 + rng.below(60);
    ConfidenceMap m(h, w);
    const int mode = k % 3;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double u = rng.uniform();
      m.data()[i] = float(mode == 0 ? u : mode == 1 ? std::pow(u, 6.0) : (u < 0.8 ? 0.1 * u : 0.7 + 0.3 * u));
    }
    const OtsuResult r = otsu_threshold(m);
    REQUIRE_FALSE(r.degenerate);
    REQUIRE(r.bin == test::otsu_oracle(m));
    REQUIRE(r.threshold == (r.bin + 0.5) / 256.0);
  }
}

TEST_CASE("otsu fixtures") {
  const OtsuResult c = otsu_threshold(ConfidenceMap::Constant(8, 8, 0.4f));
  CHECK(c.degenerate);
  CHECK(c.threshold == doctest::Approx(0.4));

  ConfidenceMap split = ConfidenceMap::Zero(10, 10);
  split.topRows(1).setOnes();
  const OtsuResult r = otsu_threshold(split);
  CHECK_FALSE(r.degenerate);
  CHECK(r.threshold > 0.0);
  CHECK(r.threshold < 1.0);
  CHECK(r.bin == test::otsu_oracle(split));
  CHECK((binarize(split, 1.0, r.threshold) == split).all());

  // Two levels in adjacent bins and a lone outlier.
  ConfidenceMap two = ConfidenceMap::Constant(8, 8, 0.5f);
  two(0, 0) = 0.504f;
  CHECK(otsu_threshold(two).bin == test::otsu_oracle(two));
  ConfidenceMap tail = ConfidenceMap::Zero(32, 32);
  tail(5, 5) = 1.0f;
  CHECK(otsu_threshold(tail).bin == test::otsu_oracle(tail));
  CHECK_ERROR_KIND(otsu_threshold(ConfidenceMap()), ErrorKind::invalid_argument);
}

TEST_CASE("binarize uses a strict inequality") {
  ConfidenceMap m(1, 3);
  m << 0.5f, 0.25f, 0.2f;
  const ConfidenceMap b = binarize(m, 0.35, 0.6);
  CHECK(b(0, 0) == 1.0f);
  const ConfidenceMap e = binarize(m, 0.5, 0.5);
  CHECK(e(0, 1) == 0.0f);
  CHECK(e(0, 0) == 1.0f);
  CHECK(binarize(ConfidenceMap::Zero(4, 4), 0.35, 0.5).maxCoeff() == 0.0f);
  CHECK_ERROR_KIND(binarize(m, 0.0, 0.5), ErrorKind::invalid_argument);
  CHECK_ERROR_KIND(binarize(m, 1.5, 0.5), ErrorKind::invalid_argument);
}

TEST_CASE("binarize is monotone in beta") {
  Rng rng(14);
  ConfidenceMap m(20, 20);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = float(rng.uniform());
  ConfidenceMap prev = binarize(m, 0.05, 0.7);
  for (double beta = 0.1; beta <= 1.0; beta += 0.05) {
    const ConfidenceMap cur = binarize(m, beta, 0.7);
    CHECK((cur <= prev).all());
    prev = cur;
  }
}

TEST_CASE("region analysis fixtures") {
  CHECK(region_analysis(ConfidenceMap::Zero(5, 5)).empty());

  ConfidenceMap two = ConfidenceMap::Zero(10, 12);
  two.block(1, 1, 3, 3).setOnes();
  two.block(5, 7, 3, 3).setOnes();
  const auto r = region_analysis(two);
  REQUIRE(r.size() == 2);
  CHECK(r[0].centroid.isApprox(Eigen::Vector2d(2, 2)));
  CHECK(r[1].centroid.isApprox(Eigen::Vector2d(8, 6)));
  CHECK(r[0].area == 9);
  CHECK(r[0].semi_major == doctest::Approx(r[0].semi_minor));

  const auto d = region_analysis(disc(40, 40, 19.3, 20.6, 10.0));
  REQUIRE(d.size() == 1);
  CHECK((d[0].centroid - Eigen::Vector2d(19.3, 20.6)).norm() <= 0.5);
  CHECK(std::abs(d[0].semi_major - 10.0) <= 1.0);
  CHECK(std::abs(d[0].semi_minor - 10.0) <= 1.0);
}

TEST_CASE("8-connectivity joins diagonal neighbours") {
  ConfidenceMap m = ConfidenceMap::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 2) = 1;
  m(0, 3) = 1;
  int count = 0;
  const Plane<int> labels = label_components(m, count);
  CHECK(count == 2);
  CHECK(labels(0, 0) == 1);
  CHECK(labels(2, 2) == 1);
  CHECK(labels(0, 3) == 2);
}

TEST_CASE("region areas account for every foreground pixel") {
  Rng rng(15);
  for (int k = 0; k < 20; ++k) {
    ConfidenceMap m(30, 30);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < 0.3 ? 1.0f : 0.0f;
    int total = 0;
    for (const auto& r : region_analysis(m)) total += r.area;
    CHECK(total == int(m.sum()));
  }
}

TEST_CASE("region filtering") {
  ConfidenceMap m = disc(60, 60, 15, 15, 5) + disc(60, 60, 40, 40, 6);
  m(2, 50) = m(55, 3) = m(30, 58) = 1.0f;
  const auto props = region_analysis(m);
  REQUIRE(props.size() == 5);
  const auto kept = filter_regions(props, 3.0);
  REQUIRE(kept.size() == 2);
  CHECK((kept[0] - Eigen::Vector2d(15, 15)).norm() < 0.5);
  CHECK((kept[1] - Eigen::Vector2d(40, 40)).norm() < 0.5);

  const double exact = props[0].semi_major + props[0].semi_minor;
  for (const auto& c : filter_regions({props[0]}, exact)) CHECK(c.x() < 0);  // never reached
  CHECK(filter_regions({props[0]}, exact).empty());
  CHECK(filter_regions(props, 1e6).empty());
}

TEST_CASE("split_chains separates touching discs") {
  ConfidenceMap m = ConfidenceMap::Zero(40, 80);
  for (double cx : {12.0, 24.0, 36.0}) m = m.max(disc(40, 80, cx, 20, 6.5));
  m = m.max(disc(40, 80, 64, 20, 6));
  int count = 0;
  const Plane<int> labels = label_components(m, count);
  REQUIRE(count == 2);
  const auto regions = region_analysis(labels, count);
  const auto parts = split_chains(labels, regions, 12.0, 6 + 12.0, 1);
  REQUIRE(parts.size() == 4);
  std::vector<double> xs;
  for (const auto& p : parts) xs.push_back(p.x());
  std::sort(xs.begin(), xs.end());
  CHECK(xs[0] == doctest::Approx(12).epsilon(0.05));
  CHECK(xs[1] == doctest::Approx(24).epsilon(0.05));
  CHECK(xs[2] == doctest::Approx(36).epsilon(0.05));
  CHECK(xs[3] == doctest::Approx(64).epsilon(0.02));
}

TEST_CASE("kmeans_1d fixtures") {
  const std::vector<double> v = {1, 1, 1, 5, 5, 9};
  const KMeans1D r = kmeans_1d(v, 3, 1);
  REQUIRE(r.centers.size() == 3);
  CHECK(r.centers[0] == 1.0);
  CHECK(r.centers[1] == 5.0);
  CHECK(r.centers[2] == 9.0);
  CHECK(kmeans_1d(v, 1, 1).centers[0] == doctest::Approx(22.0 / 6.0));
  CHECK_ERROR_KIND(kmeans_1d(std::vector<double>{1, 2}, 3, 1), ErrorKind::insufficient_points);
}

TEST_CASE("kmeans_1d reaches the exhaustive optimum on separated data") {
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v;
    for (double g : {10.0, 20.0, 30.0})
      for (int i = 0; i < 10; ++i) v.push_back(g + rng.uniform(-2, 2));
    const KMeans1D r = kmeans_1d(v, 3, trial);
    CHECK(r.inertia == doctest::Approx(exhaustive_inertia(v, 3)).epsilon(1e-9));
    CHECK(std::abs(r.centers[0] - 10) <= 1.5);
    CHECK(std::abs(r.centers[1] - 20) <= 1.5);
    CHECK(std::abs(r.centers[2] - 30) <= 1.5);
  }
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(4 + rng.below(8));
    for (auto& x : v) x = rng.uniform(0, 10);
    for (int k = 1; k <= 3 && k <= int(v.size()); ++k)
      CHECK(kmeans_1d(v, k, trial).inertia >= exhaustive_inertia(v, k) - 1e-9);
  }
}

TEST_CASE("decode_matrix round trips grids") {
  const GridLayout layout;
  const double S = 640;
  CHECK(decode_matrix({}, 20, S, layout, 1).bits == BitMatrix(20));
  Rng rng(17);
  const double pitch = registered_pitch(20, layout, S);
  for (int trial = 0; trial < 30; ++trial) {
    const BitMatrix bits = random_bit_matrix(20, 100 + trial);
    std::vector<Eigen::Vector2d> c = grid_centroids(bits, layout, S);
    CHECK(decode_matrix(c, 20, S, layout, trial).bits == bits);
    for (auto& p : c) {
      const double a = rng.uniform(0, 2 * std::numbers::pi), r = rng.uniform(0, 0.2 * pitch);
      p += r * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    CHECK(decode_matrix(c, 20, S, layout, trial).bits == bits);
    // A common shift well inside half a cell changes nothing.
    for (auto& p : c) p += Eigen::Vector2d(0.1 * pitch, -0.1 * pitch);
    CHECK(decode_matrix(c, 20, S, layout, trial).bits == bits);
  }
}

TEST_CASE("decode_matrix falls back on sparse matrices") {
  const GridLayout layout;
  BitMatrix bits(20);
  bits.set(3, 4, true);
  bits.set(17, 9, true);
  const DecodeResult r = decode_matrix(grid_centroids(bits, layout, 640), 20, 640, layout, 1);
  CHECK(r.used_fallback);
  CHECK(r.bits == bits);
}

TEST_CASE("within_grid drops outliers") {
  const GridLayout layout;
  const std::vector<Eigen::Vector2d> pts = {registered_cell_center(20, layout, 0, 0, 640), Eigen::Vector2d(2, 2),
                                            Eigen::Vector2d(320, 638)};
  const auto kept = within_grid(pts, 20, 640, layout);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == pts[0]);
}

TEST_CASE("landmark detection on a rendered scene") {
  const SceneTemplate t;
  const Frame f = render_frame(t, 7, 3);
  const BumpSet geom = layout_geometry(f.bits, t.layout);
  const CameraPose cam = camera_pose(t, f.scene, t.render_height, t.render_width);
  const SceneTracer tracer(geom, t.layout);
  // Oracle: centroid of the pixels whose center ray hits each landmark.
  std::array<Eigen::Vector2d, 4> sum;
  std::array<int, 4> n{};
  for (auto& s : sum) s.setZero();
  for (int y = 0; y < t.render_height; ++y)
    for (int x = 0; x < t.render_width; ++x) {
      const RayHit hit = tracer.trace(cam.eye, cam.ray(x + 0.5, y + 0.5));
      if (hit.kind != SurfaceKind::landmark) continue;
      sum[hit.index] += Eigen::Vector2d(x, y);
      ++n[hit.index];
    }
  const Quad found = detect_landmarks(f.image, LandmarkTolerance{});
  for (int k = 0; k < 4; ++k) {
    REQUIRE(n[k] > 0);
    CHECK((found[k] - sum[k] / n[k]).norm() <= 1.5);
  }

  SUBCASE("order is keyed by color") {
    const int h = f.image.height, w = f.image.width;
    ImageBuffer rot(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) rot.pixel(x, h - 1 - y) = f.image.pixel(y, x);
    const Quad r = detect_landmarks(rot, LandmarkTolerance{});
    for (int k = 0; k < 4; ++k) CHECK((r[k] - Eigen::Vector2d(h - 1 - found[k].y(), found[k].x())).norm() < 1e-6);
  }
  SUBCASE("missing red") {
    ImageBuffer img = f.image;
    const ConfidenceMap red = landmark_mask(img, 0, LandmarkTolerance{});
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        if (red(y, x) > 0) img.pixel(y, x).setConstant(0.5f);
    try {
      detect_landmarks(img, LandmarkTolerance{});
      FAIL("expected landmark-not-found");
    } catch (const LandmarkError& e) {
      CHECK(e.kind() == ErrorKind::landmark_not_found);
      CHECK(e.color_id() == 0);
    }
  }
  SUBCASE("a second red blob is ambiguous") {
    ImageBuffer img = f.image;
    const ConfidenceMap red = landmark_mask(img, 0, LandmarkTolerance{});
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        if (red(y, x) > 0) {
          const int yy = (y + img.height / 2) % img.height, xx = (x + img.width / 2) % img.width;
          img.pixel(yy, xx) = img.pixel(y, x);
        }
    CHECK_ERROR_KIND(detect_landmarks(img, LandmarkTolerance{}), ErrorKind::landmark_ambiguous);
  }
}

TEST_CASE("ground-truth maps decode exactly") {
  const SceneTemplate t;
  RetrievalParams p;
  for (int index : {0, 41, 83}) {
    const Frame f = render_frame(t, index, 21);
    const RetrievalResult r = decode_confidence_map(f.image, f.ground_truth, p);
    CHECK(r.bits == f.bits);
    CHECK(r.diagnostics.registered.rows() == 640);
    CHECK_FALSE(r.diagnostics.otsu.degenerate);
  }
}

TEST_CASE("an image without landmarks fails retrieval") {
  ImageBuffer gray(64, 64);
  gray.pixels.setConstant(0.5f);
  CHECK_ERROR_KIND(decode_confidence_map(gray, ConfidenceMap::Zero(16, 16), RetrievalParams{}),
                   ErrorKind::landmark_not_found);
  CHECK_ERROR_KIND(retrieve(ImageBuffer(62, 64), nn::zero_network<float>(), RetrievalParams{}), ErrorKind::shape_error);
}

TEST_CASE("retrieval params validation and JSON") {
  RetrievalParams p;
  CHECK(p.beta == 0.35);
  CHECK(p.square_size == 640);
  CHECK(p.effective_min_axis_sum() == doctest::Approx(0.25 * 640 / 20));
  RetrievalParams bad = p;
  bad.square_size = 630;
  CHECK_ERROR_KIND(bad.validate(), ErrorKind::invalid_argument);
  bad = p;
  bad.beta = 0;
  CHECK_ERROR_KIND(bad.validate(), ErrorKind::invalid_argument);
  p.beta = 0.8;
  const RetrievalParams back = nlohmann::json(p).get<RetrievalParams>();
  CHECK(back.beta == 0.8);
  CHECK(back.m == 20);
}

}
