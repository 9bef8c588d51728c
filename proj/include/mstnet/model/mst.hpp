#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mstnet/nn/checkpoint.hpp"
#include "mstnet/nn/loss.hpp"
#include "mstnet/nn/model.hpp"
#include "mstnet/nn/optimizer.hpp"

namespace mstnet::model {

// Mel-spectrogram-transform network: three SAME-padded 1-D convolutions that
// map a [batch, 1, L] waveform to a [batch, 60, ceil(L/512)] log-mel estimate.
// Tanh on the last layer bounds outputs to the (-1, 1) target range.
template <typename T>
nn::Model<T> build_mst(std::uint64_t seed) {
  nn::Model<T> m;
  m.template add<nn::Conv1D<T>>(1, 512, 1024, 512, nn::Padding::Same);
  m.template add<nn::ReLU<T>>();
  m.template add<nn::Conv1D<T>>(512, 256, 3, 1, nn::Padding::Same);
  m.template add<nn::ReLU<T>>();
  m.template add<nn::Conv1D<T>>(256, 60, 3, 1, nn::Padding::Same);
  m.template add<nn::TanhLayer<T>>();
  nn::init_xavier(m, seed);
  return m;
}

// Paired regression set: inputs [N, 1, 51200], targets [N, 60, 100].
struct MstData {
  nn::Tensor<float> inputs;
  nn::Tensor<float> targets;

  std::size_t size() const { return inputs.numel() == 0 ? 0 : inputs.dim(0); }
};

struct MstTrainConfig {
  double lr = 3e-4;
  std::size_t batch = 100;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::uint64_t shuffle_seed = 1;
};

struct MstEpochStats {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct MstTrainResult {
  nn::Checkpoint best;
  double best_val_mse = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::vector<MstEpochStats> curve;
};

namespace detail {

// Copy the given sample rows of a [N, ...] tensor into a [idx.size(), ...]
// batch tensor.
inline nn::Tensor<float> gather(const nn::Tensor<float>& all,
                                const std::vector<std::size_t>& idx, std::size_t lo,
                                std::size_t hi) {
  const std::size_t per = all.numel() / all.dim(0);
  std::vector<std::size_t> shape = all.shape();
  shape[0] = hi - lo;
  nn::Tensor<float> out(shape);
  for (std::size_t i = lo; i < hi; ++i)
    std::memcpy(out.data() + (i - lo) * per, all.data() + idx[i] * per,
                per * sizeof(float));
  return out;
}

inline double eval_mse(nn::Model<float>& m, const MstData& data, std::size_t batch) {
  if (data.size() == 0) return 0.0;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double acc = 0.0;
  for (std::size_t lo = 0; lo < idx.size(); lo += batch) {
    const std::size_t hi = std::min(lo + batch, idx.size());
    auto pred = m.forward(gather(data.inputs, idx, lo, hi), false);
    acc += nn::mse_loss(pred, gather(data.targets, idx, lo, hi)).value * double(hi - lo);
  }
  return acc / double(data.size());
}

}  // namespace detail

// Adam regression training with early stopping on validation MSE. Returns the
// checkpoint with the lowest validation MSE seen; stops after `patience`
// epochs without improvement or at max_epochs.
inline MstTrainResult train_mst(nn::Model<float>& m, const MstData& train,
                                const MstData& val, const MstTrainConfig& cfg) {
  if (train.size() == 0) throw std::invalid_argument("train_mst: empty training set");

  nn::Adam<float> opt(cfg.lr);
  auto params = m.params();
  nn::Rng shuffle_rng(cfg.shuffle_seed);
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);

  MstTrainResult res;
  std::size_t since_improvement = 0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(idx.begin(), idx.end());
    double train_acc = 0.0;
    for (std::size_t lo = 0; lo < idx.size(); lo += cfg.batch) {
      const std::size_t hi = std::min(lo + cfg.batch, idx.size());
      auto pred = m.forward(detail::gather(train.inputs, idx, lo, hi), true);
      auto loss = nn::mse_loss(pred, detail::gather(train.targets, idx, lo, hi));
      train_acc += loss.value * double(hi - lo);
      m.zero_grads();
      m.backward(loss.grad);
      opt.step(params);
    }
    MstEpochStats st;
    st.epoch = epoch;
    st.train_mse = train_acc / double(train.size());
    st.val_mse = (val.size() > 0) ? detail::eval_mse(m, val, cfg.batch) : st.train_mse;
    res.curve.push_back(st);

    if (st.val_mse < res.best_val_mse) {
      res.best_val_mse = st.val_mse;
      res.best_epoch = epoch;
      res.best = nn::snapshot(m);
      since_improvement = 0;
    } else if (++since_improvement > cfg.patience) {
      break;
    }
  }
  return res;
}

inline void write_curve_csv(const std::vector<MstEpochStats>& curve,
                            const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write curve " + path.string());
  os << "epoch,train_mse,val_mse\n";
  for (const auto& st : curve)
    os << st.epoch << "," << st.train_mse << "," << st.val_mse << "\n";
}

// Forward a single normalized raw segment (exactly 51200 samples) through the
// network; returns the predicted 60 x 100 grid.
inline nn::Tensor<float> predict_mel(nn::Model<float>& m, const std::vector<float>& raw) {
  if (raw.size() != 51200)
    throw std::invalid_argument("predict_mel: expected 51200 samples, got " +
                                std::to_string(raw.size()));
  nn::Tensor<float> x({1, 1, raw.size()});
  std::copy(raw.begin(), raw.end(), x.data());
  auto y = m.forward(x, false);
  y.reshape({y.dim(1), y.dim(2)});
  return y;
}

// Dump the first-layer kernels (512 rows x 1024 samples) as CSV for
// qualitative inspection of the learned frequency decomposition.
inline void export_filters(const nn::Checkpoint& ck, const std::filesystem::path& path) {
  if (ck.tensors.empty()) throw std::runtime_error("export_filters: empty checkpoint");
  const auto& w = ck.tensors.front().second;  // layer0.weight [512, 1, 1024]
  if (w.rank() != 3 || w.dim(0) != 512 || w.dim(2) != 1024)
    throw std::runtime_error("export_filters: first tensor is not a 512x1x1024 kernel");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write filter dump " + path.string());
  for (std::size_t f = 0; f < 512; ++f) {
    for (std::size_t k = 0; k < 1024; ++k) {
      if (k) os << ",";
      os << w[f * 1024 + k];
    }
    os << "\n";
  }
}

}  // namespace mstnet::model
