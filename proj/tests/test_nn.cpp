#include "support.hpp"
#include "gradcheck.hpp"

#include "wmr/nn/cnn3dw.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

using namespace wmr;
using namespace wmr::nn;
using test::TensorD;
using test::VectorD;

namespace {

ConvLayer<double> random_conv(int c_out, int c_in, int k, Rng& rng) {
  return {test::random_tensor(c_out, c_in, k, k, rng, 0.3), VectorD::NullaryExpr(c_out, [&] { return rng.normal(); })};
}

double dot(const TensorD& a, const TensorD& b) { return a.data.dot(b.data); }

Architecture narrow() {
  Architecture a;
  a.channels = {3, 4, 3, 2, 1};
  return a;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("conv2d identity kernel") {
  Rng rng(1);
  const TensorD x = test::random_tensor(2, 1, 5, 6, rng);
  ConvLayer<double> id{TensorD(1, 1, 1, 1), VectorD::Zero(1)};
  id.kernel.data[0] = 1.0;
  CHECK(conv2d_forward(x, id).data == x.data);
}

TEST_CASE("conv2d all-ones kernel pads with zeros") {
  TensorD x(1, 1, 5, 5);
  x.data.setConstant(2.0);
  ConvLayer<double> ones{TensorD(1, 1, 3, 3), VectorD::Zero(1)};
  ones.kernel.data.setOnes();
  const TensorD y = conv2d_forward(x, ones);
  CHECK(y.at(0, 0, 2, 2) == 18.0);
  CHECK(y.at(0, 0, 1, 3) == 18.0);
  CHECK(y.at(0, 0, 0, 0) == 8.0);
  CHECK(y.at(0, 0, 4, 4) == 8.0);
  CHECK(y.at(0, 0, 0, 2) == 12.0);
}

TEST_CASE("conv2d matches a direct loop") {
  Rng rng(2);
  const TensorD x = test::random_tensor(2, 3, 7, 5, rng);
  const ConvLayer<double> layer = random_conv(4, 3, 5, rng);
  const TensorD y = conv2d_forward(x, layer);
  for (int n = 0; n < 2; ++n)
    for (int o = 0; o < 4; ++o)
      for (int yy = 0; yy < 7; ++yy)
        for (int xx = 0; xx < 5; ++xx) {
          double s = layer.bias[o];
          for (int c = 0; c < 3; ++c)
            for (int dy = -2; dy <= 2; ++dy)
              for (int dx = -2; dx <= 2; ++dx) {
                const int sy = yy + dy, sx = xx + dx;
                if (sy < 0 || sy >= 7 || sx < 0 || sx >= 5) continue;
                s += layer.kernel.at(o, c, dy + 2, dx + 2) * x.at(n, c, sy, sx);
              }
          REQUIRE(y.at(n, o, yy, xx) == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("conv2d rejects mismatched channels") {
  Rng rng(3);
  const TensorD x = test::random_tensor(1, 3, 4, 4, rng);
  CHECK_ERROR_KIND(conv2d_forward(x, random_conv(2, 2, 3, rng)), ErrorKind::shape_error);
  CHECK_ERROR_KIND(conv2d_forward(x, random_conv(2, 3, 2, rng)), ErrorKind::shape_error);
}

TEST_CASE("conv2d gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    TensorD x = test::random_tensor(2, 3, 6, 5, rng);
    ConvLayer<double> layer = random_conv(4, 3, seed % 2 ? 3 : 5, rng);
    const TensorD w = test::random_tensor(2, 4, 6, 5, rng);
    const ConvGrads<double> g = conv2d_backward(x, layer, w);
    auto f = [&] { return dot(conv2d_forward(x, layer), w); };
    CHECK(test::check_gradient(f, x.data, g.input.data).max_error <= 1e-3);
    CHECK(test::check_gradient(f, layer.kernel.data, g.kernel.data).max_error <= 1e-3);
    CHECK(test::check_gradient(f, layer.bias, g.bias).max_error <= 1e-3);
  }
}

TEST_CASE("maxpool2 forward") {
  TensorD c(1, 2, 4, 6);
  c.data.setConstant(0.25);
  const auto pc = maxpool2_forward(c);
  CHECK(pc.out.h == 2);
  CHECK(pc.out.w == 3);
  CHECK((pc.out.data.array() == 0.25).all());

  TensorD b(1, 1, 2, 2);
  b.data << 1, 2, 3, 4;
  CHECK(maxpool2_forward(b).out.data[0] == 4.0);

  CHECK_ERROR_KIND(maxpool2_forward(TensorD(1, 1, 3, 4)), ErrorKind::shape_error);
  CHECK_ERROR_KIND(maxpool2_forward(TensorD(1, 1, 4, 5)), ErrorKind::shape_error);
}

TEST_CASE("maxpool2 routes ties to the first element") {
  TensorD t(1, 1, 2, 2);
  t.data << 5, 5, 5, 5;
  const auto r = maxpool2_forward(t);
  TensorD g(1, 1, 1, 1);
  g.data[0] = 1.0;
  const TensorD back = maxpool2_backward(t, r, g);
  CHECK(back.data[0] == 1.0);
  CHECK(back.data.tail(3).isZero());
}

TEST_CASE("maxpool2 gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(200 + seed);
    TensorD x(2, 2, 6, 4);
    // Distinct values 0.01 apart keep every argmax stable under +-h.
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(int(i + 1))]);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] = 0.01 * order[i];
    const TensorD w = test::random_tensor(2, 2, 3, 2, rng);
    const auto fwd = maxpool2_forward(x);
    const TensorD g = maxpool2_backward(x, fwd, w);
    auto f = [&] { return dot(maxpool2_forward(x).out, w); };
    CHECK(test::check_gradient(f, x.data, g.data).max_error <= 1e-3);
  }
}

TEST_CASE("relu") {
  TensorD neg(1, 1, 2, 2);
  neg.data << -1, -2, -0.5, -3;
  CHECK(relu_forward(neg).data.isZero());
  TensorD mixed(1, 1, 1, 2);
  mixed.data << -1, 2;
  CHECK(relu_forward(mixed).data == Eigen::Vector2d(0, 2));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(300 + seed);
    TensorD x = test::random_tensor(2, 3, 4, 4, rng);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (std::abs(x.data[i]) < 0.01) x.data[i] += x.data[i] < 0 ? -0.01 : 0.01;
    const TensorD w = test::random_tensor(2, 3, 4, 4, rng);
    const TensorD g = relu_backward(x, w);
    auto f = [&] { return dot(relu_forward(x), w); };
    CHECK(test::check_gradient(f, x.data, g.data).max_error <= 1e-3);
  }
}

TEST_CASE("mse loss") {
  TensorD p(1, 1, 1, 2), t(1, 1, 1, 2);
  p.data << 1, 0;
  const auto r = mse_loss(p, t);
  CHECK(r.loss == 0.5);
  CHECK(r.grad.data == Eigen::Vector2d(1, 0));
  const auto same = mse_loss(p, p);
  CHECK(same.loss == 0.0);
  CHECK(same.grad.data.isZero());
  CHECK_ERROR_KIND(mse_loss(p, TensorD(1, 1, 2, 1)), ErrorKind::shape_error);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(400 + seed);
    TensorD pred = test::random_tensor(2, 1, 3, 5, rng);
    const TensorD target = test::random_tensor(2, 1, 3, 5, rng);
    const TensorD g = mse_loss(pred, target).grad;
    auto f = [&] { return mse_loss(pred, target).loss; };
    CHECK(test::check_gradient(f, pred.data, g.data).max_error <= 1e-3);
  }
}

TEST_CASE("network gradients match finite differences end to end") {
  int checked = 0, skipped = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(500 + seed);
    Network<double> net = init_network<double>(seed, narrow());
    for (auto& c : net.convs)
      for (Eigen::Index i = 0; i < c.bias.size(); ++i) c.bias[i] = 0.1 * rng.normal();
    TensorD x = test::random_tensor(1, 3, 8, 8, rng);
    const TensorD target = test::random_tensor(1, 1, 2, 2, rng);

    ForwardCache<double> cache;
    const TensorD out = network_forward(net, x, &cache);
    REQUIRE(out.shape() == std::array<int, 4>{1, 1, 2, 2});
    TensorD grad_x;
    const Network<double> grads = network_backward(net, cache, mse_loss(out, target).grad, &grad_x);

    auto f = [&] { return mse_loss(network_forward(net, x), target).loss; };
    auto tally = [&](const test::GradCheck& r) {
      CHECK(r.max_error <= 1e-2);
      checked += r.checked;
      skipped += r.skipped;
    };
    tally(test::check_gradient(f, x.data, grad_x.data, 1e-3, true));
    auto params = net.parameters();
    const auto gparams = std::as_const(grads).parameters();
    for (std::size_t p = 0; p < params.size(); ++p) tally(test::check_gradient(f, *params[p], *gparams[p], 1e-3, true));
  }
  MESSAGE("checked " << checked << ", skipped " << skipped << " non-smooth entries");
  CHECK(skipped <= 0.05 * (checked + skipped));
}

TEST_CASE("adam") {
  using V = Eigen::VectorXd;
  SUBCASE("zero gradient leaves parameters unchanged") {
    V p = V::Constant(3, 1.5), g = V::Zero(3);
    AdamState<double> s;
    adam_step<double>({&p}, {&g}, s);
    CHECK(p == V::Constant(3, 1.5));
  }
  SUBCASE("first step moves by lr") {
    V p = V::Zero(1), g = V::Constant(1, 0.5);
    AdamState<double> s;
    s.lr = 1e-4;
    adam_step<double>({&p}, {&g}, s);
    CHECK(p[0] == doctest::Approx(-1e-4).epsilon(1e-6));
  }
  SUBCASE("three steps follow the bias-corrected recursion") {
    V p = V::Constant(1, 1.0);
    AdamState<double> s;
    s.lr = 1e-3;
    long double m = 0, v = 0, q = 1.0L;
    const double gs[3] = {0.5, -0.25, 2.0};
    for (int t = 1; t <= 3; ++t) {
      V g = V::Constant(1, gs[t - 1]);
      adam_step<double>({&p}, {&g}, s);
      m = 0.9L * m + 0.1L * gs[t - 1];
      v = 0.999L * v + 0.001L * gs[t - 1] * gs[t - 1];
      const long double mh = m / (1 - std::pow(0.9L, t)), vh = v / (1 - std::pow(0.999L, t));
      q -= 1e-3L * mh / (std::sqrt(vh) + 1e-8L);
      CHECK(std::abs(p[0] - double(q)) <= 1e-12);
    }
    CHECK(s.step == 3);
  }
  SUBCASE("non-finite gradient") {
    V p = V::Zero(2), g(2);
    g << 1.0, std::numeric_limits<double>::quiet_NaN();
    AdamState<double> s;
    CHECK_ERROR_KIND(adam_step<double>({&p}, {&g}, s), ErrorKind::numeric_error);
  }
}

TEST_CASE("cnn3dw architecture and shapes") {
  const NetworkWeights net = init_network<float>(1);
  const Architecture a = net.architecture();
  CHECK(a.kernels == std::array<int, 5>{9, 7, 7, 7, 1});
  CHECK(a.channels == std::array<int, 5>{48, 96, 48, 24, 1});
  CHECK(a.input_channels == 3);
  CHECK(net.parameter_count() == 3 * 48 * 81 + 48 + 48 * 96 * 49 + 96 + 96 * 48 * 49 + 48 + 48 * 24 * 49 + 24 + 24 + 1);

  Rng rng(4);
  nn::Tensor<float> x(1, 3, 64, 64);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data[i] = float(rng.uniform());
  const auto y = network_forward(net, x);
  CHECK(y.shape() == std::array<int, 4>{1, 1, 16, 16});
  CHECK(y.data.allFinite());
  CHECK(network_forward(zero_network<float>(), x).data.isZero());

  CHECK_ERROR_KIND(network_forward(net, nn::Tensor<float>(1, 3, 62, 64)), ErrorKind::shape_error);
  CHECK_ERROR_KIND(network_forward(net, nn::Tensor<float>(1, 2, 64, 64)), ErrorKind::shape_error);

  ImageBuffer img(64, 48);
  const ConfidenceMap map = forward_cnn3dw(img, net);
  CHECK(map.rows() == 16);
  CHECK(map.cols() == 12);
  CHECK(map.minCoeff() >= 0.0f);
  CHECK(map.maxCoeff() <= 1.0f);
}

TEST_CASE("init is seeded") {
  const NetworkWeights a = init_network<float>(3), b = init_network<float>(3), c = init_network<float>(4);
  for (int i = 0; i < 5; ++i) {
    CHECK(a.convs[i].kernel.data == b.convs[i].kernel.data);
    CHECK(a.convs[i].bias.isZero());
  }
  CHECK(a.convs[0].kernel.data != c.convs[0].kernel.data);
  // He-normal spread on the widest layer.
  const auto& k = a.convs[1].kernel.data;
  const double sd = std::sqrt(k.squaredNorm() / k.size());
  CHECK(sd == doctest::Approx(std::sqrt(2.0 / (48 * 49))).epsilon(0.02));
}

TEST_CASE("weights file round trip") {
  test::TempDir dir("weights");
  const NetworkWeights net = init_network<float>(9);
  write_weights(dir / "a.bin", net);
  const NetworkWeights back = read_weights(dir / "a.bin");
  for (int i = 0; i < 5; ++i) {
    CHECK(back.convs[i].kernel.shape() == net.convs[i].kernel.shape());
    CHECK(back.convs[i].kernel.data == net.convs[i].kernel.data);
    CHECK(back.convs[i].bias == net.convs[i].bias);
  }
  write_weights(dir / "b.bin", back);
  const std::string bytes = test::slurp(dir / "a.bin");
  CHECK(bytes == test::slurp(dir / "b.bin"));
  CHECK(bytes.substr(0, 4) == "WMRW");

  { std::ofstream(dir / "bad.bin", std::ios::binary) << "NOPE" << bytes.substr(4); }
  CHECK_ERROR_KIND(read_weights(dir / "bad.bin"), ErrorKind::dataset_error);
  { std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2); }
  CHECK_ERROR_KIND(read_weights(dir / "short.bin"), ErrorKind::dataset_error);
  { std::ofstream(dir / "long.bin", std::ios::binary) << bytes << "x"; }
  CHECK_ERROR_KIND(read_weights(dir / "long.bin"), ErrorKind::dataset_error);
  CHECK_ERROR_KIND(read_weights(dir / "missing.bin"), ErrorKind::dataset_error);
}

}
