#pragma once

#include <cmath>
#include <functional>

#include "mstnet/nn/loss.hpp"
#include "mstnet/nn/model.hpp"
#include "mstnet/nn/rng.hpp"

namespace mstnet::nn {

// Loss over model output: returns value and d(loss)/d(output).
template <typename T>
using LossFn = std::function<LossResult<T>(const Tensor<T>&)>;

// Central finite differences against backprop over a random coordinate
// subsample. Run on double models with dropout disabled (train=false keeps
// dropout as identity). Perturbed evaluations restart the forward pass at the
// owning layer using cached activations, which is exact for a sequential
// stack.
//
// `atol` is an absolute agreement floor: coordinates where |fd - an| <= atol
// count as exact. The finite-difference quotient of a loss of magnitude L
// carries ~eps*L/(2h) of rounding noise, so on large stacks coordinates with
// near-zero gradients cannot be certified in relative terms at any step size;
// they are still verified to machine-level absolute precision. Default 0
// keeps the strict relative criterion for small models.
template <typename T>
double gradient_check(Model<T>& model, const Tensor<T>& input, const LossFn<T>& loss,
                      std::size_t coords_per_tensor = 200, double h = 1e-4,
                      std::uint64_t seed = 0, double atol = 0.0) {
  // Forward, caching the input of every layer.
  std::vector<Tensor<T>> acts;
  acts.reserve(model.size() + 1);
  acts.push_back(input);
  for (std::size_t i = 0; i < model.size(); ++i)
    acts.push_back(model.layer(i).forward(acts.back(), false));

  model.zero_grads();
  auto lr = loss(acts.back());
  model.backward(lr.grad);

  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  double max_rel = 0.0;
  for (std::size_t li = 0; li < model.size(); ++li) {
    for (auto p : model.layer(li).params()) {
      const std::size_t n = p.value->numel();
      const std::size_t m = std::min(coords_per_tensor, n);
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t idx = (m == n) ? c : std::size_t(rng.below(n));
        const T orig = (*p.value)[idx];
        (*p.value)[idx] = orig + T(h);
        const double lp = loss(model.forward_from(li, acts[li], false)).value;
        (*p.value)[idx] = orig - T(h);
        const double lm = loss(model.forward_from(li, acts[li], false)).value;
        (*p.value)[idx] = orig;
        const double fd = (lp - lm) / (2.0 * h);
        const double an = double((*p.grad)[idx]);
        if (std::abs(fd - an) <= atol) continue;
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  // Restore caches for the unperturbed parameters.
  model.forward(input, false);
  return max_rel;
}

}  // namespace mstnet::nn
