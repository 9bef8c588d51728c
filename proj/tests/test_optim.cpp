#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "mstnet/nn/checkpoint.hpp"
#include "mstnet/nn/init.hpp"
#include "mstnet/nn/layers.hpp"
#include "mstnet/nn/loss.hpp"
#include "mstnet/nn/model.hpp"
#include "mstnet/nn/optimizer.hpp"

using namespace mstnet::nn;

namespace {

// Single scalar parameter exposed through the ParamRef interface.
struct Scalar {
  Tensor<double> value{std::vector<std::size_t>{1}};
  Tensor<double> grad{std::vector<std::size_t>{1}};
  std::vector<ParamRef<double>> params(bool frozen = false) {
    return {{"theta", &value, &grad, frozen}};
  }
};

}  // namespace

TEST_CASE("zero gradient leaves parameters unchanged") {
  Scalar s;
  s.value[0] = 1.25;
  Adam<double> adam;
  SgdNesterov<double> sgd;
  for (int i = 0; i < 50; ++i) {
    s.grad[0] = 0.0;
    adam.step(s.params());
    sgd.step(s.params());
  }
  REQUIRE(s.value[0] == 1.25);
}

TEST_CASE("first Adam step matches the hand-computed recurrence") {
  Scalar s;
  s.value[0] = 0.0;
  s.grad[0] = 1.0;
  const double lr = 3e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Adam<double> adam(lr, b1, b2, eps);
  adam.step(s.params());
  // m=0.1, v=0.001, mhat=1, vhat=1 -> update = -lr/(1+eps)
  const double expect = -lr * 1.0 / (std::sqrt(1.0) + eps);
  REQUIRE(s.value[0] == Catch::Approx(expect).margin(1e-15));
}

TEST_CASE("both optimizers minimize a 1-D quadratic") {
  for (int which = 0; which < 2; ++which) {
    Scalar s;
    s.value[0] = 1.0;
    // step sizes chosen so 500 steps suffice on this objective
    Adam<double> adam(0.05);
    SgdNesterov<double> sgd(5e-3, 0.9);
    int steps = 0;
    for (; steps < 500; ++steps) {
      s.grad[0] = 2.0 * s.value[0];  // f = theta^2
      if (which == 0)
        adam.step(s.params());
      else
        sgd.step(s.params());
      if (std::abs(s.value[0]) < 1e-2) break;
    }
    INFO((which == 0 ? "adam" : "nesterov"));
    REQUIRE(std::abs(s.value[0]) < 1e-2);
  }
}

TEST_CASE("nesterov lookahead form, one step by hand") {
  Scalar s;
  s.value[0] = 2.0;
  s.grad[0] = 0.5;
  SgdNesterov<double> sgd(0.1, 0.9);
  sgd.step(s.params());
  // v = -0.05; theta = 2 + 0.9*(-0.05) - 0.05 = 1.905
  REQUIRE(s.value[0] == Catch::Approx(1.905).margin(1e-12));
}

TEST_CASE("frozen parameters receive no updates or state") {
  Scalar s;
  s.value[0] = 3.0;
  Adam<double> adam;
  SgdNesterov<double> sgd;
  for (int i = 0; i < 10; ++i) {
    s.grad[0] = 1.0;
    adam.step(s.params(true));
    sgd.step(s.params(true));
  }
  REQUIRE(s.value[0] == 3.0);
}

TEST_CASE("frozen layer stays bit-identical under training steps") {
  Model<float> m;
  auto* frozen_layer = m.add<Dense<float>>(4, 4);
  m.add<ReLU<float>>();
  m.add<Dense<float>>(4, 2);
  init_xavier(m, 3);
  frozen_layer->set_frozen(true);

  const Tensor<float> before = *m.params()[0].value;
  const Tensor<float> head_before = *m.params()[2].value;
  SgdNesterov<float> sgd(0.05, 0.9);
  Tensor<float> x({8, 4});
  Rng drng(4);
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = float(drng.uniform(-1, 1));
  for (int epoch = 0; epoch < 20; ++epoch) {
    m.zero_grads();
    auto y = m.forward(x, true);
    Tensor<float> target(y.shape());
    auto lr = mse_loss(y, target);
    m.backward(lr.grad);
    sgd.step(m.params());
  }
  const auto& after = *m.params()[0].value;
  for (std::size_t i = 0; i < before.numel(); ++i) {
    REQUIRE(std::memcmp(&before[i], &after[i], sizeof(float)) == 0);
  }
  // the unfrozen head must have moved
  const auto& head_after = *m.params()[2].value;
  bool moved = false;
  for (std::size_t i = 0; i < head_before.numel(); ++i)
    if (head_before[i] != head_after[i]) moved = true;
  REQUIRE(moved);
}

TEST_CASE("checkpoint save/load round trip") {
  namespace fs = std::filesystem;
  Model<float> m;
  m.add<Conv1D<float>>(1, 3, 5, 2);
  m.add<ReLU<float>>();
  m.add<Dense<float>>(6, 2);
  init_xavier(m, 8);

  const auto path = fs::temp_directory_path() / "mstnet_ckpt_test.ckpt";
  auto ck = snapshot(m);
  save_checkpoint(ck, path);
  auto back = load_checkpoint(path);
  REQUIRE(back.architecture == ck.architecture);
  REQUIRE(back.tensors.size() == ck.tensors.size());
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    REQUIRE(back.tensors[i].first == ck.tensors[i].first);
    for (std::size_t j = 0; j < ck.tensors[i].second.numel(); ++j)
      REQUIRE(back.tensors[i].second[j] == ck.tensors[i].second[j]);
  }

  Model<float> m2;
  m2.add<Conv1D<float>>(1, 3, 5, 2);
  m2.add<ReLU<float>>();
  m2.add<Dense<float>>(6, 2);
  restore(m2, back);
  auto p1 = m.params();
  auto p2 = m2.params();
  for (std::size_t i = 0; i < p1.size(); ++i)
    for (std::size_t j = 0; j < p1[i].value->numel(); ++j)
      REQUIRE((*p1[i].value)[j] == (*p2[i].value)[j]);

  Model<float> wrong;
  wrong.add<Dense<float>>(4, 4);
  REQUIRE_THROWS(restore(wrong, back));
}
