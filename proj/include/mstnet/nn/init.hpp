#pragma once

#include <cmath>
#include <stdexcept>

#include "mstnet/nn/rng.hpp"
#include "mstnet/nn/tensor.hpp"

namespace mstnet::nn {

// Fan-in/fan-out by parameter shape: dense [out,in]; conv [out,in,k...] where
// the receptive field multiplies both fans.
inline void fan_in_out(const std::vector<std::size_t>& shape, std::size_t& fan_in,
                       std::size_t& fan_out) {
  if (shape.size() < 2) throw std::invalid_argument("xavier: need at least 2 dims");
  std::size_t rf = 1;
  for (std::size_t i = 2; i < shape.size(); ++i) rf *= shape[i];
  fan_in = shape[1] * rf;
  fan_out = shape[0] * rf;
}

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
template <typename T>
void xavier_fill(Tensor<T>& t, Rng& rng) {
  std::size_t fan_in = 0, fan_out = 0;
  fan_in_out(t.shape(), fan_in, fan_out);
  const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = T(rng.uniform(-bound, bound));
}

template <typename T>
Tensor<T> xavier_init(const std::vector<std::size_t>& shape, std::uint64_t seed) {
  Tensor<T> t(shape);
  Rng rng(seed);
  xavier_fill(t, rng);
  return t;
}

}  // namespace mstnet::nn
