#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mstnet/nn/init.hpp"
#include "mstnet/nn/layers.hpp"

namespace mstnet::nn {

// Fixed sequential stack. Backward accumulates into parameter gradients, so
// call zero_grads() once per optimization step.
template <typename T>
class Model {
 public:
  Model() = default;

  template <typename L, typename... Args>
  L* add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L* raw = layer.get();
    layers_.push_back(std::move(layer));
    return raw;
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, train);
    return cur;
  }

  // Forward starting at layer `from` (used by the incremental gradient check).
  Tensor<T> forward_from(std::size_t from, const Tensor<T>& x, bool train) {
    Tensor<T> cur = x;
    for (std::size_t i = from; i < layers_.size(); ++i) cur = layers_[i]->forward(cur, train);
    return cur;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    Tensor<T> cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> all;
    for (std::size_t i = 0; i < layers_.size(); ++i)
      for (auto p : layers_[i]->params()) {
        p.name = "layer" + std::to_string(i) + "." + p.name;
        all.push_back(p);
      }
    return all;
  }

  void zero_grads() {
    for (auto& l : layers_)
      for (auto p : l->params()) p.grad->fill(T(0));
  }

  std::string describe() const {
    std::string s;
    for (const auto& l : layers_) {
      s += l->describe();
      s += "\n";
    }
    return s;
  }

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Xavier-initialize all weights; biases start at zero.
template <typename T>
void init_xavier(Model<T>& model, std::uint64_t seed) {
  Rng rng(seed);
  for (auto p : model.params()) {
    if (p.value->rank() >= 2)
      xavier_fill(*p.value, rng);
    else
      p.value->fill(T(0));
  }
}

}  // namespace mstnet::nn
