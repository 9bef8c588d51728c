#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mstnet/nn/init.hpp"
#include "mstnet/nn/layers.hpp"
#include "mstnet/nn/loss.hpp"
#include "mstnet/nn/model.hpp"
#include "oracles.hpp"

using namespace mstnet::nn;

namespace {

template <typename T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, unsigned seed, double amp = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = T(d(rng));
  return t;
}

}  // namespace

TEST_CASE("conv1d SAME output length") {
  Conv1D<double> conv(1, 4, 1024, 512, Padding::Same);
  auto y = conv.forward(random_tensor<double>({2, 1, 51200}, 2), false);
  REQUIRE(y.shape() == std::vector<std::size_t>({2, 4, 100}));
}

TEST_CASE("conv1d identity kernel") {
  Conv1D<double> conv(1, 1, 1, 1, Padding::Same);
  conv.weight()[0] = 1.0;
  auto x = random_tensor<double>({3, 1, 17}, 3);
  auto y = conv.forward(x, false);
  REQUIRE(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) REQUIRE(y[i] == Catch::Approx(x[i]));
}

TEST_CASE("conv1d matches nested-loop oracle") {
  for (unsigned seed : {5u, 6u, 7u}) {
    const std::size_t cin = 2, cout = 3, K = 3, L = 11, stride = 1;
    Conv1D<double> conv(cin, cout, K, stride, Padding::Same);
    auto w = random_tensor<double>({cout, cin, K}, seed);
    auto b = random_tensor<double>({cout}, seed + 100);
    conv.weight() = w;
    conv.bias() = b;
    auto x = random_tensor<double>({1, cin, L}, seed + 200);

    std::vector<std::vector<double>> xin(cin, std::vector<double>(L));
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t t = 0; t < L; ++t) xin[c][t] = x.at3(0, c, t);
    std::vector<std::vector<std::vector<double>>> wv(
        cout, std::vector<std::vector<double>>(cin, std::vector<double>(K)));
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t k = 0; k < K; ++k) wv[o][c][k] = w[(o * cin + c) * K + k];
    std::vector<double> bv(b.data(), b.data() + cout);

    auto y = conv.forward(x, false);
    auto ref = oracle::conv1d(xin, wv, bv, stride, true);
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t t = 0; t < ref[0].size(); ++t)
        REQUIRE(y.at3(0, o, t) == Catch::Approx(ref[o][t]).margin(1e-6));
  }
}

TEST_CASE("SAME padding length law over random triples") {
  std::mt19937 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t L = 1 + rng() % 200;
    const std::size_t s = 1 + rng() % 8;
    const std::size_t k = 1 + rng() % (2 * L);
    // enumeration oracle: count valid output positions over the padded signal
    const std::size_t total = same_pad_total(L, k, s);
    REQUIRE(k <= L + total);
    std::size_t count = 0;
    for (std::size_t start = 0; start + k <= L + total; start += s) ++count;
    REQUIRE(same_out_len(L, s) == (L + s - 1) / s);
    REQUIRE(count >= same_out_len(L, s));  // padding suffices for ceil(L/s) positions

    Conv1D<double> conv(1, 1, k, s, Padding::Same);
    conv.weight().fill(0.0);
    Tensor<double> x({1, 1, L});
    auto y = conv.forward(x, false);
    REQUIRE(y.dim(2) == (L + s - 1) / s);
  }
}

TEST_CASE("conv1d shape errors") {
  Conv1D<double> conv(2, 3, 3, 1);
  REQUIRE_THROWS(conv.forward(Tensor<double>({1, 4, 10}), false));
  REQUIRE_THROWS(conv.forward(Tensor<double>({1, 10}), false));
}

TEST_CASE("conv2d valid geometry matches the 2-D classifier dimensions") {
  Conv2D<double> conv(1, 80, 57, 6);
  auto y = conv.forward(Tensor<double>({1, 1, 60, 101}), false);
  REQUIRE(y.shape() == std::vector<std::size_t>({1, 80, 4, 96}));
  MaxPool2D<double> pool(4, 3, 1, 3);
  auto p = pool.forward(y, false);
  REQUIRE(p.shape() == std::vector<std::size_t>({1, 80, 1, 32}));
}

TEST_CASE("maxpool constant input and first-index tie rule") {
  Tensor<double> x({1, 1, 2, 4});
  x.fill(0.5);
  MaxPool2D<double> pool(2, 2, 2, 2);
  auto y = pool.forward(x, false);
  REQUIRE(y.shape() == std::vector<std::size_t>({1, 1, 1, 2}));
  REQUIRE(y[0] == 0.5);
  Tensor<double> g(y.shape());
  g.fill(1.0);
  auto gx = pool.backward(g);
  // all inputs tie; the first index in each window receives the gradient
  REQUIRE(gx[0] == 1.0);
  REQUIRE(gx[1] == 0.0);
  REQUIRE(gx[2] == 1.0);
  REQUIRE(gx[3] == 0.0);
  REQUIRE(gx[4] == 0.0);
}

TEST_CASE("maxpool window larger than input errors") {
  MaxPool2D<double> pool(4, 4, 1, 1);
  REQUIRE_THROWS(pool.forward(Tensor<double>({1, 1, 2, 2}), false));
}

TEST_CASE("softmax of zero logits is uniform") {
  Softmax<double> sm;
  Tensor<double> x({1, 50});
  auto y = sm.forward(x, false);
  for (std::size_t i = 0; i < 50; ++i) REQUIRE(y[i] == Catch::Approx(0.02).margin(1e-12));
}

TEST_CASE("softmax rows sum to one") {
  Softmax<double> sm;
  auto x = random_tensor<double>({7, 13}, 31, 5.0);
  auto y = sm.forward(x, false);
  for (std::size_t r = 0; r < 7; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 13; ++c) {
      REQUIRE(y[r * 13 + c] >= 0.0);
      s += y[r * 13 + c];
    }
    REQUIRE(s == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("dropout is identity at eval and keeps expectation at train") {
  Dropout<double> drop(0.5, 77);
  auto x = random_tensor<double>({1, 100}, 41);
  auto eval_out = drop.forward(x, false);
  for (std::size_t i = 0; i < x.numel(); ++i) REQUIRE(eval_out[i] == x[i]);

  Tensor<double> ones({1, 100});
  ones.fill(1.0);
  double acc = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    auto y = drop.forward(ones, true);
    for (std::size_t i = 0; i < y.numel(); ++i) acc += y[i];
  }
  const double mean = acc / double(trials * 100);
  REQUIRE(mean == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("dropout rejects bad keep probability") {
  REQUIRE_THROWS(Dropout<double>(0.0, 1));
  REQUIRE_THROWS(Dropout<double>(1.5, 1));
}

TEST_CASE("xavier bound and determinism") {
  auto t = xavier_init<double>({100, 100}, 123);
  const double bound = std::sqrt(6.0 / 200.0);
  REQUIRE(bound == Catch::Approx(0.17320508).margin(1e-6));
  for (std::size_t i = 0; i < t.numel(); ++i) REQUIRE(std::abs(t[i]) <= bound);
  auto t2 = xavier_init<double>({100, 100}, 123);
  for (std::size_t i = 0; i < t.numel(); ++i) REQUIRE(t[i] == t2[i]);
}

TEST_CASE("xavier empirical variance matches uniform moment") {
  auto t = xavier_init<double>({500, 200}, 9);  // 1e5 draws
  const double bound = std::sqrt(6.0 / 700.0);
  double ss = 0.0;
  for (std::size_t i = 0; i < t.numel(); ++i) ss += t[i] * t[i];
  const double var = ss / double(t.numel());
  REQUIRE(var == Catch::Approx(bound * bound / 3.0).epsilon(0.05));
}

TEST_CASE("mse basics") {
  auto x = random_tensor<double>({2, 5}, 1);
  auto [v, g] = mse_loss(x, x);
  REQUIRE(v == 0.0);
  for (std::size_t i = 0; i < g.numel(); ++i) REQUIRE(g[i] == 0.0);
}

TEST_CASE("cross entropy at a confident correct prediction is near zero") {
  Tensor<double> logits({1, 5});
  logits[2] = 50.0;
  auto [v, g] = cross_entropy_loss(logits, {2});
  REQUIRE(v < 1e-9);
}

TEST_CASE("cross entropy label validation") {
  Tensor<double> logits({1, 5});
  REQUIRE_THROWS(cross_entropy_loss(logits, {5}));
  REQUIRE_THROWS(cross_entropy_loss(logits, {-1}));
}

TEST_CASE("checkpoint architecture text is stable") {
  Model<double> m;
  m.add<Conv1D<double>>(1, 4, 8, 2);
  m.add<ReLU<double>>();
  m.add<Dense<double>>(16, 3);
  REQUIRE(m.describe() ==
          "conv1d in=1 out=4 k=8 s=2 pad=same\nrelu\ndense in=16 out=3\n");
}
