#pragma once

#include <cmath>
#include <vector>

#include "mstnet/nn/layers.hpp"

namespace mstnet::nn {

// Optimizers update only non-frozen parameters and allocate no state for
// frozen ones. The ParamRef list must be stable across steps.
template <typename T>
class Adam {
 public:
  explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(const std::vector<ParamRef<T>>& params) {
    ++t_;
    ensure_state(params);
    std::size_t s = 0;
    const double bc1 = 1.0 - std::pow(b1_, double(t_));
    const double bc2 = 1.0 - std::pow(b2_, double(t_));
    for (const auto& p : params) {
      if (p.frozen) continue;
      auto& m = m_[s];
      auto& v = v_[s];
      ++s;
      for (std::size_t i = 0; i < p.value->numel(); ++i) {
        const double g = double((*p.grad)[i]);
        m[i] = b1_ * m[i] + (1.0 - b1_) * g;
        v[i] = b2_ * v[i] + (1.0 - b2_) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        (*p.value)[i] -= T(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

 private:
  void ensure_state(const std::vector<ParamRef<T>>& params) {
    if (!m_.empty()) return;
    for (const auto& p : params) {
      if (p.frozen) continue;
      m_.emplace_back(p.value->numel(), 0.0);
      v_.emplace_back(p.value->numel(), 0.0);
    }
  }

  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Nesterov momentum in lookahead form:
//   v <- mu * v - lr * g;  theta <- theta + mu * v - lr * g.
template <typename T>
class SgdNesterov {
 public:
  explicit SgdNesterov(double lr = 5e-3, double momentum = 0.9)
      : lr_(lr), mu_(momentum) {}

  void step(const std::vector<ParamRef<T>>& params) {
    ensure_state(params);
    std::size_t s = 0;
    for (const auto& p : params) {
      if (p.frozen) continue;
      auto& v = v_[s];
      ++s;
      for (std::size_t i = 0; i < p.value->numel(); ++i) {
        const double g = double((*p.grad)[i]);
        v[i] = mu_ * v[i] - lr_ * g;
        (*p.value)[i] += T(mu_ * v[i] - lr_ * g);
      }
    }
  }

 private:
  void ensure_state(const std::vector<ParamRef<T>>& params) {
    if (!v_.empty()) return;
    for (const auto& p : params) {
      if (p.frozen) continue;
      v_.emplace_back(p.value->numel(), 0.0);
    }
  }

  double lr_, mu_;
  std::vector<std::vector<double>> v_;
};

}  // namespace mstnet::nn
