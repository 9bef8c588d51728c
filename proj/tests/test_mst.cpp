#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mstnet/feat/melspec.hpp"
#include "mstnet/feat/normalize.hpp"
#include "mstnet/model/mst.hpp"

using namespace mstnet;

namespace {

// Regression pairs on short waveforms (len samples -> len/512 target frames)
// so training-loop tests stay fast; the network is length-agnostic.
model::MstData make_data(std::size_t n, std::size_t len, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> freq(200.0, 4000.0);
  const std::size_t frames = len / 512;

  std::vector<std::vector<double>> raws;
  std::vector<feat::MelSpectrogram> mels;
  feat::StatsAccumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(len);
    const double f = freq(rng);
    for (std::size_t t = 0; t < len; ++t)
      x[t] = std::sin(2.0 * M_PI * f * double(t) / 22050.0);
    auto mel = feat::compute_log_mel(x);
    // keep the first `frames` columns, mirroring target slicing
    feat::MelSpectrogram tgt;
    tgt.n_mels = mel.n_mels;
    tgt.n_frames = frames;
    tgt.values.resize(tgt.n_mels * frames);
    for (std::size_t m = 0; m < mel.n_mels; ++m)
      for (std::size_t t = 0; t < frames; ++t) tgt.at(m, t) = mel.at(m, t);
    acc.add(tgt.values);
    raws.push_back(std::move(x));
    mels.push_back(std::move(tgt));
  }
  const auto stats = acc.finish();

  model::MstData d;
  d.inputs = nn::Tensor<float>({n, 1, len});
  d.targets = nn::Tensor<float>({n, 60, frames});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < len; ++t) d.inputs[i * len + t] = float(raws[i][t]);
    for (std::size_t j = 0; j < 60 * frames; ++j)
      d.targets[i * 60 * frames + j] =
          float(feat::apply_norm_scalar(mels[i].values[j], stats, false));
  }
  return d;
}

std::string checkpoint_bytes(const nn::Checkpoint& ck) {
  const auto path = std::filesystem::temp_directory_path() / "mst_repro.ckpt";
  nn::save_checkpoint(ck, path);
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("mst maps [2,1,51200] to [2,60,100]") {
  auto m = model::build_mst<float>(1);
  nn::Tensor<float> x({2, 1, 51200});
  auto y = m.forward(x, false);
  REQUIRE(y.shape() == std::vector<std::size_t>{2, 60, 100});
}

TEST_CASE("mst maps [1,1,512] to [1,60,1]") {
  auto m = model::build_mst<float>(1);
  nn::Tensor<float> x({1, 1, 512});
  auto y = m.forward(x, false);
  REQUIRE(y.shape() == std::vector<std::size_t>{1, 60, 1});
}

TEST_CASE("mst output time length is ceil(L/512) for random lengths") {
  auto m = model::build_mst<float>(2);
  std::mt19937 rng(2);
  for (int i = 0; i < 10; ++i) {
    const std::size_t L = 512 + rng() % 20000;
    nn::Tensor<float> x({1, 1, L});
    auto y = m.forward(x, false);
    REQUIRE(y.dim(2) == (L + 511) / 512);
  }
}

TEST_CASE("mst first-layer parameter count is 524800") {
  auto m = model::build_mst<float>(1);
  auto p = m.params();
  REQUIRE(p[0].name == "layer0.weight");
  REQUIRE(p[1].name == "layer0.bias");
  REQUIRE(p[0].value->numel() + p[1].value->numel() == 524800);
}

TEST_CASE("mst outputs stay strictly inside (-1, 1)") {
  auto m = model::build_mst<float>(3);
  nn::Tensor<float> x({1, 1, 5120});
  std::mt19937 rng(3);
  for (std::size_t i = 0; i < x.numel(); ++i)
    x[i] = float(rng() % 2000) / 1000.0f - 1.0f;
  auto y = m.forward(x, false);
  for (std::size_t i = 0; i < y.numel(); ++i) REQUIRE(std::abs(y[i]) < 1.0f);
}

TEST_CASE("zero input propagates only the bias path: columns identical") {
  auto m = model::build_mst<float>(4);
  nn::Tensor<float> x({1, 1, 51200});
  auto y = m.forward(x, false);
  // interior time steps see identical (zero) receptive fields
  for (std::size_t band = 0; band < 60; ++band)
    for (std::size_t t = 3; t + 3 < 100; ++t)
      REQUIRE(y.at3(0, band, t) == Catch::Approx(y.at3(0, band, 50)).margin(1e-7));
}

TEST_CASE("training overfits a small fixed set") {
  auto data = make_data(10, 5120, 11);
  auto m = model::build_mst<float>(11);
  model::MstTrainConfig cfg;
  cfg.batch = 10;
  cfg.max_epochs = 250;
  cfg.patience = 250;
  auto res = model::train_mst(m, data, data, cfg);
  REQUIRE(res.best_val_mse < 0.01);
}

TEST_CASE("best checkpoint realizes the minimum recorded validation mse") {
  auto data = make_data(6, 2048, 12);
  auto m = model::build_mst<float>(12);
  model::MstTrainConfig cfg;
  cfg.batch = 3;
  cfg.max_epochs = 30;
  cfg.patience = 30;
  auto res = model::train_mst(m, data, data, cfg);
  REQUIRE_FALSE(res.curve.empty());
  for (const auto& st : res.curve) REQUIRE(res.best_val_mse <= st.val_mse + 1e-12);
  REQUIRE(res.best_val_mse <= res.curve.front().val_mse);
}

TEST_CASE("patience 0 stops one epoch after the last improvement") {
  auto data = make_data(4, 2048, 13);
  auto m = model::build_mst<float>(13);
  model::MstTrainConfig cfg;
  cfg.batch = 2;
  cfg.max_epochs = 200;
  cfg.patience = 0;
  auto res = model::train_mst(m, data, data, cfg);
  // either training ran to the cap while improving every epoch, or it halted
  // exactly one epoch after the best one
  if (res.curve.size() < cfg.max_epochs)
    REQUIRE(res.curve.size() == res.best_epoch + 2);
}

TEST_CASE("empty training set is an error") {
  auto m = model::build_mst<float>(1);
  model::MstData none;
  REQUIRE_THROWS(model::train_mst(m, none, none, {}));
}

TEST_CASE("same seed and data give byte-identical checkpoints") {
  auto data = make_data(4, 2048, 14);
  model::MstTrainConfig cfg;
  cfg.batch = 2;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  cfg.shuffle_seed = 99;

  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    auto m = model::build_mst<float>(14);
    auto res = model::train_mst(m, data, data, cfg);
    bytes[run] = checkpoint_bytes(res.best);
  }
  REQUIRE(bytes[0] == bytes[1]);
  REQUIRE_FALSE(bytes[0].empty());
}

TEST_CASE("predict_mel validates the segment length and bounds its output") {
  auto m = model::build_mst<float>(15);
  REQUIRE_THROWS(model::predict_mel(m, std::vector<float>(100)));
  std::vector<float> raw(51200, 0.25f);
  auto y = model::predict_mel(m, raw);
  REQUIRE(y.shape() == std::vector<std::size_t>{60, 100});
  for (std::size_t i = 0; i < y.numel(); ++i) REQUIRE(std::abs(y[i]) < 1.0f);
}

TEST_CASE("filter export writes 512 rows of 1024 values within the init bound") {
  auto m = model::build_mst<float>(16);
  auto ck = nn::snapshot(m);
  const auto path = std::filesystem::temp_directory_path() / "mst_filters.csv";
  model::export_filters(ck, path);

  std::ifstream is(path);
  std::string line;
  std::size_t rows = 0;
  const double bound = std::sqrt(6.0 / (1.0 * 1024 + 512.0 * 1024));
  while (std::getline(is, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      ++cols;
      REQUIRE(std::abs(std::stod(cell)) <= bound + 1e-9);
    }
    REQUIRE(cols == 1024);
  }
  REQUIRE(rows == 512);
}

TEST_CASE("curve csv has a header and one row per epoch") {
  std::vector<model::MstEpochStats> curve = {{0, 0.5, 0.6}, {1, 0.3, 0.4}};
  const auto path = std::filesystem::temp_directory_path() / "mst_curve.csv";
  model::write_curve_csv(curve, path);
  std::ifstream is(path);
  std::string line;
  REQUIRE(std::getline(is, line));
  REQUIRE(line == "epoch,train_mse,val_mse");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  REQUIRE(rows == 2);
}
