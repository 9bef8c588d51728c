#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mstnet/nn/tensor.hpp"

namespace mstnet::nn {

template <typename T>
struct LossResult {
  double value;
  Tensor<T> grad;
};

// Mean over all elements of (pred - target)^2.
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (!pred.same_shape(target)) throw std::invalid_argument("mse: shape mismatch");
  const double n = double(pred.numel());
  double acc = 0.0;
  LossResult<T> res{0.0, Tensor<T>(pred.shape())};
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    const double d = double(pred[i]) - double(target[i]);
    acc += d * d;
    res.grad[i] = T(2.0 * d / n);
  }
  res.value = acc / n;
  return res;
}

// -log softmax(logits)[label], averaged over the batch. logits: [B, C].
template <typename T>
LossResult<T> cross_entropy_loss(const Tensor<T>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size())
    throw std::invalid_argument("cross entropy: logits must be [batch, classes]");
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  LossResult<T> res{0.0, Tensor<T>(logits.shape())};
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] < 0 || std::size_t(labels[b]) >= C)
      throw std::invalid_argument("cross entropy: label out of range");
    const T* in = logits.data() + b * C;
    double mx = double(in[0]);
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, double(in[c]));
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += std::exp(double(in[c]) - mx);
    const double log_z = mx + std::log(sum);
    res.value += (log_z - double(in[std::size_t(labels[b])])) / double(B);
    for (std::size_t c = 0; c < C; ++c) {
      const double p = std::exp(double(in[c]) - log_z);
      res.grad[b * C + c] = T((p - (int(c) == labels[b] ? 1.0 : 0.0)) / double(B));
    }
  }
  return res;
}

}  // namespace mstnet::nn
