#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mstnet/model/mst.hpp"
#include "mstnet/nn/checkpoint.hpp"
#include "mstnet/nn/loss.hpp"
#include "mstnet/nn/model.hpp"
#include "mstnet/nn/optimizer.hpp"

namespace mstnet::model {

enum class InitVariant { MEL_BASELINE, RAW_XAVIER, RAW_PRETRAINED_FROZEN };

inline const char* variant_name(InitVariant v) {
  switch (v) {
    case InitVariant::MEL_BASELINE: return "mel_baseline";
    case InitVariant::RAW_XAVIER: return "raw_xavier";
    case InitVariant::RAW_PRETRAINED_FROZEN: return "raw_pretrained_frozen";
  }
  throw std::invalid_argument("unknown variant");
}

inline InitVariant parse_variant(const std::string& s) {
  if (s == "mel_baseline") return InitVariant::MEL_BASELINE;
  if (s == "raw_xavier") return InitVariant::RAW_XAVIER;
  if (s == "raw_pretrained_frozen") return InitVariant::RAW_PRETRAINED_FROZEN;
  throw std::invalid_argument("unknown variant: " + s);
}

namespace detail {

// Two 2-D conv/pool stages over a 1 x 60 x 101 input, then two dense-5000
// layers with dropout and a 50-way head. The head emits logits; softmax is
// applied by the prediction path (training uses the logit cross-entropy).
template <typename T>
void append_piczak(nn::Model<T>& m, std::uint64_t dropout_seed, double keep = 0.5) {
  m.template add<nn::Conv2D<T>>(1, 80, 57, 6, 1, 1, nn::Padding::Valid);
  m.template add<nn::ReLU<T>>();
  m.template add<nn::MaxPool2D<T>>(4, 3, 1, 3);
  m.template add<nn::Conv2D<T>>(80, 80, 1, 3, 1, 1, nn::Padding::Valid);
  m.template add<nn::ReLU<T>>();
  m.template add<nn::MaxPool2D<T>>(1, 3, 1, 3);
  m.template add<nn::Dense<T>>(80 * 1 * 10, 5000);
  m.template add<nn::ReLU<T>>();
  m.template add<nn::Dropout<T>>(keep, dropout_seed);
  m.template add<nn::Dense<T>>(5000, 5000);
  m.template add<nn::ReLU<T>>();
  m.template add<nn::Dropout<T>>(keep, dropout_seed + 1);
  m.template add<nn::Dense<T>>(5000, 50);
}

// Mel-transform layers for the raw-input variants. Dropout after each
// nonlinearity exists only in the randomly initialized variant.
template <typename T>
std::vector<nn::Conv1D<T>*> append_mst_layers(nn::Model<T>& m, bool with_dropout,
                                              std::uint64_t dropout_seed,
                                              double keep = 0.5) {
  std::vector<nn::Conv1D<T>*> convs;
  convs.push_back(m.template add<nn::Conv1D<T>>(1, 512, 1024, 512, nn::Padding::Same));
  m.template add<nn::ReLU<T>>();
  if (with_dropout) m.template add<nn::Dropout<T>>(keep, dropout_seed);
  convs.push_back(m.template add<nn::Conv1D<T>>(512, 256, 3, 1, nn::Padding::Same));
  m.template add<nn::ReLU<T>>();
  if (with_dropout) m.template add<nn::Dropout<T>>(keep, dropout_seed + 1);
  convs.push_back(m.template add<nn::Conv1D<T>>(256, 60, 3, 1, nn::Padding::Same));
  m.template add<nn::TanhLayer<T>>();
  if (with_dropout) m.template add<nn::Dropout<T>>(keep, dropout_seed + 2);
  return convs;
}

}  // namespace detail

// Assemble one of the three classifier variants:
//   MEL_BASELINE           input [B, 1, 60, 101] (normalized log-mel)
//   RAW_XAVIER             input [B, 1, 51712], MST layers with dropout
//   RAW_PRETRAINED_FROZEN  input [B, 1, 51712], MST layers loaded from the
//                          given checkpoint and frozen, no MST dropout
// Non-MST parameters are Xavier-initialized from `seed` in every variant.
template <typename T>
nn::Model<T> build_classifier(InitVariant variant, std::uint64_t seed,
                              const nn::Checkpoint* mst_ck = nullptr) {
  nn::Model<T> m;
  std::vector<nn::Conv1D<T>*> convs;
  if (variant != InitVariant::MEL_BASELINE) {
    convs = detail::append_mst_layers(m, variant == InitVariant::RAW_XAVIER,
                                      seed * 7919 + 100);
    m.template add<nn::Reshape<T>>(std::vector<std::size_t>{1, 60, 101});
  }
  detail::append_piczak(m, seed * 7919 + 200);
  nn::init_xavier(m, seed);

  if (variant == InitVariant::RAW_PRETRAINED_FROZEN) {
    if (!mst_ck)
      throw std::invalid_argument("raw_pretrained_frozen requires an MST checkpoint");
    // Validate against the canonical MST topology, then copy its tensors into
    // the stacked network's conv layers and freeze them.
    auto mst = build_mst<T>(0);
    nn::restore(mst, *mst_ck);
    auto src = mst.params();  // weight/bias pairs in layer order
    std::size_t s = 0;
    for (auto* conv : convs) {
      conv->weight() = *src[s++].value;
      conv->bias() = *src[s++].value;
      conv->set_frozen(true);
    }
  }
  return m;
}

// Labeled segment set: inputs [N, ...] matching the variant's input shape.
struct ClfData {
  nn::Tensor<float> inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

struct ClfTrainConfig {
  double lr = 5e-3;
  double momentum = 0.9;
  std::size_t batch = 500;
  std::size_t epochs = 200;
  std::uint64_t shuffle_seed = 1;
};

struct ClfEpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct ClfTrainResult {
  nn::Checkpoint final;
  nn::Checkpoint best;  // highest validation accuracy, reported alongside final
  double best_val_acc = 0.0;
  std::size_t best_epoch = 0;
  std::vector<ClfEpochStats> curve;
};

inline std::vector<int> predict_batch(nn::Model<float>& m, const nn::Tensor<float>& x) {
  auto logits = m.forward(x, false);
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  std::vector<int> out(B);
  for (std::size_t b = 0; b < B; ++b) {
    const float* row = logits.data() + b * C;
    out[b] = int(std::max_element(row, row + C) - row);
  }
  return out;
}

// Per-segment class probabilities (softmax over the logit head).
inline std::vector<std::vector<double>> predict_probs(nn::Model<float>& m,
                                                      const nn::Tensor<float>& x) {
  auto logits = m.forward(x, false);
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  std::vector<std::vector<double>> out(B, std::vector<double>(C));
  for (std::size_t b = 0; b < B; ++b) {
    const float* row = logits.data() + b * C;
    double mx = row[0];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, double(row[c]));
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += out[b][c] = std::exp(double(row[c]) - mx);
    for (std::size_t c = 0; c < C; ++c) out[b][c] /= sum;
  }
  return out;
}

namespace detail {

inline double accuracy(nn::Model<float>& m, const ClfData& data, std::size_t batch) {
  if (data.size() == 0) return 0.0;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t correct = 0;
  for (std::size_t lo = 0; lo < idx.size(); lo += batch) {
    const std::size_t hi = std::min(lo + batch, idx.size());
    auto pred = predict_batch(m, gather(data.inputs, idx, lo, hi));
    for (std::size_t i = lo; i < hi; ++i)
      if (pred[i - lo] == data.labels[idx[i]]) ++correct;
  }
  return double(correct) / double(data.size());
}

}  // namespace detail

// Fixed-length SGD/Nesterov training on the logit cross-entropy. No early
// stopping; the final checkpoint is the deliverable and the best-validation
// checkpoint is kept for reporting.
inline ClfTrainResult train_classifier(nn::Model<float>& m, const ClfData& train,
                                       const ClfData& val, const ClfTrainConfig& cfg) {
  if (train.size() == 0)
    throw std::invalid_argument("train_classifier: empty training set");

  nn::SgdNesterov<float> opt(cfg.lr, cfg.momentum);
  auto params = m.params();
  nn::Rng shuffle_rng(cfg.shuffle_seed);
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);

  ClfTrainResult res;
  res.best_val_acc = -1.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(idx.begin(), idx.end());
    double loss_acc = 0.0;
    std::size_t correct = 0;
    for (std::size_t lo = 0; lo < idx.size(); lo += cfg.batch) {
      const std::size_t hi = std::min(lo + cfg.batch, idx.size());
      auto x = detail::gather(train.inputs, idx, lo, hi);
      std::vector<int> y(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) y[i - lo] = train.labels[idx[i]];

      auto logits = m.forward(x, true);
      auto loss = nn::cross_entropy_loss(logits, y);
      loss_acc += loss.value * double(hi - lo);
      const std::size_t C = logits.dim(1);
      for (std::size_t b = 0; b < hi - lo; ++b) {
        const float* row = logits.data() + b * C;
        if (int(std::max_element(row, row + C) - row) == y[b]) ++correct;
      }
      m.zero_grads();
      m.backward(loss.grad);
      opt.step(params);
    }
    ClfEpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_acc / double(train.size());
    st.train_acc = double(correct) / double(train.size());
    st.val_acc = detail::accuracy(m, val, cfg.batch);
    res.curve.push_back(st);
    if (st.val_acc > res.best_val_acc) {
      res.best_val_acc = st.val_acc;
      res.best_epoch = epoch;
      res.best = nn::snapshot(m);
    }
  }
  res.final = nn::snapshot(m);
  if (res.best.tensors.empty()) res.best = res.final;
  return res;
}

inline void write_clf_curve_csv(const std::vector<ClfEpochStats>& curve,
                                const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write curve " + path.string());
  os << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& st : curve)
    os << st.epoch << "," << st.train_loss << "," << st.train_acc << "," << st.val_acc
       << "\n";
}

enum class Voting { Majority, Probability };

// Combine per-segment probability vectors into one clip label.
//   majority:    mode of per-segment argmax labels; ties broken by summed
//                probability, then by lowest class index
//   probability: argmax of the mean probability vector (ties -> lowest index)
inline int vote(const std::vector<std::vector<double>>& seg_probs, Voting v) {
  if (seg_probs.empty()) throw std::invalid_argument("vote: no segments");
  const std::size_t C = seg_probs[0].size();

  std::vector<double> prob_sum(C, 0.0);
  std::vector<std::size_t> counts(C, 0);
  for (const auto& p : seg_probs) {
    if (p.size() != C) throw std::invalid_argument("vote: inconsistent class counts");
    std::size_t arg = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
    ++counts[arg];
    for (std::size_t c = 0; c < C; ++c) prob_sum[c] += p[c];
  }

  if (v == Voting::Probability)
    return int(std::max_element(prob_sum.begin(), prob_sum.end()) - prob_sum.begin());

  std::size_t best = 0;
  for (std::size_t c = 1; c < C; ++c) {
    if (counts[c] > counts[best] ||
        (counts[c] == counts[best] && prob_sum[c] > prob_sum[best]))
      best = c;
  }
  return int(best);
}

// Forward all of a clip's segments (inputs stacked along the batch dimension)
// and vote. Callers supply at least one segment; all-silent clips are expected
// to arrive via the keep-loudest segmentation fallback.
inline int predict_clip(nn::Model<float>& m, const nn::Tensor<float>& segments, Voting v) {
  return vote(predict_probs(m, segments), v);
}

}  // namespace mstnet::model
