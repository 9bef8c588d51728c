#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mstnet/nn/rng.hpp"
#include "mstnet/nn/tensor.hpp"

namespace mstnet::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;

enum class Padding { Same, Valid };

// SAME: out = ceil(L/s), total pad = max((out-1)*s + k - L, 0), floor-left.
inline std::size_t same_out_len(std::size_t len, std::size_t stride) {
  return (len + stride - 1) / stride;
}
inline std::size_t same_pad_total(std::size_t len, std::size_t k, std::size_t stride) {
  const long long t = (static_cast<long long>(same_out_len(len, stride)) - 1) *
                          static_cast<long long>(stride) +
                      static_cast<long long>(k) - static_cast<long long>(len);
  return t > 0 ? std::size_t(t) : 0;
}

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
  bool frozen;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, bool train) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<ParamRef<T>> params() { return {}; }
  virtual std::string describe() const = 0;

  void set_frozen(bool f) { frozen_ = f; }
  bool frozen() const { return frozen_; }

 protected:
  bool frozen_ = false;
};

template <typename T>
class Conv1D final : public Layer<T> {
 public:
  Conv1D(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride,
         Padding pad = Padding::Same)
      : in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        stride_(stride),
        pad_(pad),
        weight_({out_ch, in_ch, kernel}),
        bias_({out_ch}),
        grad_weight_({out_ch, in_ch, kernel}),
        grad_bias_({out_ch}) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    if (x.rank() != 3 || x.dim(1) != in_ch_)
      throw std::invalid_argument("conv1d: expected [batch," + std::to_string(in_ch_) +
                                  ",L], got " + x.shape_str());
    const std::size_t B = x.dim(0), L = x.dim(2);
    geometry(L);
    if (kernel_ > L + pad_total_)
      throw std::invalid_argument("conv1d: kernel exceeds padded input length");
    input_ = x;

    Tensor<T> y({B, out_ch_, out_len_});
    Mat<T> cols(in_ch_ * kernel_, out_len_);
    ConstMatMap<T> W(weight_.data(), out_ch_, in_ch_ * kernel_);
    for (std::size_t b = 0; b < B; ++b) {
      im2col(x.data() + b * in_ch_ * L, L, cols);
      MatMap<T> yb(y.data() + b * out_ch_ * out_len_, out_ch_, out_len_);
      yb.noalias() = W * cols;
      for (std::size_t o = 0; o < out_ch_; ++o) yb.row(o).array() += bias_[o];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t B = input_.dim(0), L = input_.dim(2);
    if (gy.rank() != 3 || gy.dim(0) != B || gy.dim(1) != out_ch_ || gy.dim(2) != out_len_)
      throw std::invalid_argument("conv1d backward: gradient shape mismatch");

    Tensor<T> gx(input_.shape());
    Mat<T> cols(in_ch_ * kernel_, out_len_);
    Mat<T> gcols(in_ch_ * kernel_, out_len_);
    ConstMatMap<T> W(weight_.data(), out_ch_, in_ch_ * kernel_);
    MatMap<T> gW(grad_weight_.data(), out_ch_, in_ch_ * kernel_);
    for (std::size_t b = 0; b < B; ++b) {
      ConstMatMap<T> gyb(gy.data() + b * out_ch_ * out_len_, out_ch_, out_len_);
      im2col(input_.data() + b * in_ch_ * L, L, cols);
      gW.noalias() += gyb * cols.transpose();
      for (std::size_t o = 0; o < out_ch_; ++o) grad_bias_[o] += gyb.row(o).sum();
      gcols.noalias() = W.transpose() * gyb;
      col2im(gcols, L, gx.data() + b * in_ch_ * L);
    }
    return gx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{"weight", &weight_, &grad_weight_, this->frozen_},
            {"bias", &bias_, &grad_bias_, this->frozen_}};
  }

  std::string describe() const override {
    return "conv1d in=" + std::to_string(in_ch_) + " out=" + std::to_string(out_ch_) +
           " k=" + std::to_string(kernel_) + " s=" + std::to_string(stride_) +
           (pad_ == Padding::Same ? " pad=same" : " pad=valid");
  }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  void geometry(std::size_t L) {
    if (pad_ == Padding::Same) {
      out_len_ = same_out_len(L, stride_);
      pad_total_ = same_pad_total(L, kernel_, stride_);
    } else {
      if (L < kernel_) throw std::invalid_argument("conv1d: input shorter than kernel");
      out_len_ = (L - kernel_) / stride_ + 1;
      pad_total_ = 0;
    }
    pad_left_ = pad_total_ / 2;
  }

  void im2col(const T* x, std::size_t L, Mat<T>& cols) const {
    cols.setZero();
    for (std::size_t c = 0; c < in_ch_; ++c)
      for (std::size_t k = 0; k < kernel_; ++k) {
        T* row = cols.row(c * kernel_ + k).data();
        for (std::size_t t = 0; t < out_len_; ++t) {
          const long long j = static_cast<long long>(t * stride_ + k) -
                              static_cast<long long>(pad_left_);
          if (j >= 0 && j < static_cast<long long>(L)) row[t] = x[c * L + std::size_t(j)];
        }
      }
  }

  void col2im(const Mat<T>& gcols, std::size_t L, T* gx) const {
    for (std::size_t c = 0; c < in_ch_; ++c)
      for (std::size_t k = 0; k < kernel_; ++k) {
        const T* row = gcols.row(c * kernel_ + k).data();
        for (std::size_t t = 0; t < out_len_; ++t) {
          const long long j = static_cast<long long>(t * stride_ + k) -
                              static_cast<long long>(pad_left_);
          if (j >= 0 && j < static_cast<long long>(L)) gx[c * L + std::size_t(j)] += row[t];
        }
      }
  }

  std::size_t in_ch_, out_ch_, kernel_, stride_;
  Padding pad_;
  std::size_t out_len_ = 0, pad_total_ = 0, pad_left_ = 0;
  Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor<T> input_;
};

template <typename T>
class Conv2D final : public Layer<T> {
 public:
  Conv2D(std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw,
         std::size_t sh = 1, std::size_t sw = 1, Padding pad = Padding::Valid)
      : in_ch_(in_ch),
        out_ch_(out_ch),
        kh_(kh),
        kw_(kw),
        sh_(sh),
        sw_(sw),
        pad_(pad),
        weight_({out_ch, in_ch, kh, kw}),
        bias_({out_ch}),
        grad_weight_({out_ch, in_ch, kh, kw}),
        grad_bias_({out_ch}) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    if (x.rank() != 4 || x.dim(1) != in_ch_)
      throw std::invalid_argument("conv2d: expected [batch," + std::to_string(in_ch_) +
                                  ",H,W], got " + x.shape_str());
    const std::size_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
    geometry(H, W);
    input_ = x;

    Tensor<T> y({B, out_ch_, oh_, ow_});
    Mat<T> cols(in_ch_ * kh_ * kw_, oh_ * ow_);
    ConstMatMap<T> Wm(weight_.data(), out_ch_, in_ch_ * kh_ * kw_);
    for (std::size_t b = 0; b < B; ++b) {
      im2col(x.data() + b * in_ch_ * H * W, H, W, cols);
      MatMap<T> yb(y.data() + b * out_ch_ * oh_ * ow_, out_ch_, oh_ * ow_);
      yb.noalias() = Wm * cols;
      for (std::size_t o = 0; o < out_ch_; ++o) yb.row(o).array() += bias_[o];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t B = input_.dim(0), H = input_.dim(2), W = input_.dim(3);
    Tensor<T> gx(input_.shape());
    Mat<T> cols(in_ch_ * kh_ * kw_, oh_ * ow_);
    Mat<T> gcols(in_ch_ * kh_ * kw_, oh_ * ow_);
    ConstMatMap<T> Wm(weight_.data(), out_ch_, in_ch_ * kh_ * kw_);
    MatMap<T> gW(grad_weight_.data(), out_ch_, in_ch_ * kh_ * kw_);
    for (std::size_t b = 0; b < B; ++b) {
      ConstMatMap<T> gyb(gy.data() + b * out_ch_ * oh_ * ow_, out_ch_, oh_ * ow_);
      im2col(input_.data() + b * in_ch_ * H * W, H, W, cols);
      gW.noalias() += gyb * cols.transpose();
      for (std::size_t o = 0; o < out_ch_; ++o) grad_bias_[o] += gyb.row(o).sum();
      gcols.noalias() = Wm.transpose() * gyb;
      col2im(gcols, H, W, gx.data() + b * in_ch_ * H * W);
    }
    return gx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{"weight", &weight_, &grad_weight_, this->frozen_},
            {"bias", &bias_, &grad_bias_, this->frozen_}};
  }

  std::string describe() const override {
    return "conv2d in=" + std::to_string(in_ch_) + " out=" + std::to_string(out_ch_) +
           " k=" + std::to_string(kh_) + "x" + std::to_string(kw_) + " s=" +
           std::to_string(sh_) + "x" + std::to_string(sw_) +
           (pad_ == Padding::Same ? " pad=same" : " pad=valid");
  }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  void geometry(std::size_t H, std::size_t W) {
    if (pad_ == Padding::Same) {
      oh_ = same_out_len(H, sh_);
      ow_ = same_out_len(W, sw_);
      ph_ = same_pad_total(H, kh_, sh_) / 2;
      pw_ = same_pad_total(W, kw_, sw_) / 2;
    } else {
      if (H < kh_ || W < kw_)
        throw std::invalid_argument("conv2d: input smaller than kernel");
      oh_ = (H - kh_) / sh_ + 1;
      ow_ = (W - kw_) / sw_ + 1;
      ph_ = pw_ = 0;
    }
  }

  void im2col(const T* x, std::size_t H, std::size_t W, Mat<T>& cols) const {
    cols.setZero();
    for (std::size_t c = 0; c < in_ch_; ++c)
      for (std::size_t ki = 0; ki < kh_; ++ki)
        for (std::size_t kj = 0; kj < kw_; ++kj) {
          T* row = cols.row((c * kh_ + ki) * kw_ + kj).data();
          for (std::size_t i = 0; i < oh_; ++i) {
            const long long r = static_cast<long long>(i * sh_ + ki) -
                                static_cast<long long>(ph_);
            if (r < 0 || r >= static_cast<long long>(H)) continue;
            for (std::size_t j = 0; j < ow_; ++j) {
              const long long cC = static_cast<long long>(j * sw_ + kj) -
                                   static_cast<long long>(pw_);
              if (cC < 0 || cC >= static_cast<long long>(W)) continue;
              row[i * ow_ + j] = x[(c * H + std::size_t(r)) * W + std::size_t(cC)];
            }
          }
        }
  }

  void col2im(const Mat<T>& gcols, std::size_t H, std::size_t W, T* gx) const {
    for (std::size_t c = 0; c < in_ch_; ++c)
      for (std::size_t ki = 0; ki < kh_; ++ki)
        for (std::size_t kj = 0; kj < kw_; ++kj) {
          const T* row = gcols.row((c * kh_ + ki) * kw_ + kj).data();
          for (std::size_t i = 0; i < oh_; ++i) {
            const long long r = static_cast<long long>(i * sh_ + ki) -
                                static_cast<long long>(ph_);
            if (r < 0 || r >= static_cast<long long>(H)) continue;
            for (std::size_t j = 0; j < ow_; ++j) {
              const long long cC = static_cast<long long>(j * sw_ + kj) -
                                   static_cast<long long>(pw_);
              if (cC < 0 || cC >= static_cast<long long>(W)) continue;
              gx[(c * H + std::size_t(r)) * W + std::size_t(cC)] += row[i * ow_ + j];
            }
          }
        }
  }

  std::size_t in_ch_, out_ch_, kh_, kw_, sh_, sw_;
  Padding pad_;
  std::size_t oh_ = 0, ow_ = 0, ph_ = 0, pw_ = 0;
  Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor<T> input_;
};

// Max pooling over [batch, C, H, W]; ties go to the first (lowest) index.
template <typename T>
class MaxPool2D final : public Layer<T> {
 public:
  MaxPool2D(std::size_t ph, std::size_t pw, std::size_t sh, std::size_t sw)
      : ph_(ph), pw_(pw), sh_(sh), sw_(sw) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    if (x.rank() != 4) throw std::invalid_argument("maxpool2d: expected rank-4 input");
    const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (ph_ > H || pw_ > W)
      throw std::invalid_argument("maxpool2d: pool window exceeds input");
    in_shape_ = x.shape();
    oh_ = (H - ph_) / sh_ + 1;
    ow_ = (W - pw_) / sw_ + 1;

    Tensor<T> y({B, C, oh_, ow_});
    argmax_.assign(y.numel(), 0);
    std::size_t n = 0;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c) {
        const T* plane = x.data() + (b * C + c) * H * W;
        for (std::size_t i = 0; i < oh_; ++i)
          for (std::size_t j = 0; j < ow_; ++j, ++n) {
            T best = plane[i * sh_ * W + j * sw_];
            std::size_t besti = i * sh_ * W + j * sw_;
            for (std::size_t pi = 0; pi < ph_; ++pi)
              for (std::size_t pj = 0; pj < pw_; ++pj) {
                const std::size_t idx = (i * sh_ + pi) * W + (j * sw_ + pj);
                if (plane[idx] > best) {
                  best = plane[idx];
                  besti = idx;
                }
              }
            y[n] = best;
            argmax_[n] = (b * C + c) * H * W + besti;
          }
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(in_shape_);
    for (std::size_t n = 0; n < gy.numel(); ++n) gx[argmax_[n]] += gy[n];
    return gx;
  }

  std::string describe() const override {
    return "maxpool2d k=" + std::to_string(ph_) + "x" + std::to_string(pw_) + " s=" +
           std::to_string(sh_) + "x" + std::to_string(sw_);
  }

 private:
  std::size_t ph_, pw_, sh_, sw_;
  std::size_t oh_ = 0, ow_ = 0;
  std::vector<std::size_t> in_shape_;
  std::vector<std::size_t> argmax_;
};

// Fully connected layer; flattens everything after the batch dimension.
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features)
      : in_(in_features),
        out_(out_features),
        weight_({out_features, in_features}),
        bias_({out_features}),
        grad_weight_({out_features, in_features}),
        grad_bias_({out_features}) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const std::size_t B = x.dim(0);
    if (x.numel() != B * in_)
      throw std::invalid_argument("dense: expected " + std::to_string(in_) +
                                  " features per sample, got " + x.shape_str());
    input_ = x;
    Tensor<T> y({B, out_});
    ConstMatMap<T> X(x.data(), B, in_);
    ConstMatMap<T> W(weight_.data(), out_, in_);
    MatMap<T> Y(y.data(), B, out_);
    Y.noalias() = X * W.transpose();
    Y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias_.data(), out_);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t B = input_.dim(0);
    ConstMatMap<T> X(input_.data(), B, in_);
    ConstMatMap<T> GY(gy.data(), B, out_);
    MatMap<T> gW(grad_weight_.data(), out_, in_);
    gW.noalias() += GY.transpose() * X;
    for (std::size_t o = 0; o < out_; ++o) grad_bias_[o] += GY.col(o).sum();
    Tensor<T> gx(input_.shape());
    MatMap<T> GX(gx.data(), B, in_);
    GX.noalias() = GY * ConstMatMap<T>(weight_.data(), out_, in_);
    return gx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{"weight", &weight_, &grad_weight_, this->frozen_},
            {"bias", &bias_, &grad_bias_, this->frozen_}};
  }

  std::string describe() const override {
    return "dense in=" + std::to_string(in_) + " out=" + std::to_string(out_);
  }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
  Tensor<T> input_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    mask_.assign(x.numel(), false);
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      mask_[i] = x[i] > T(0);
      y[i] = mask_[i] ? x[i] : T(0);
    }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(gy.shape());
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] = mask_[i] ? gy[i] : T(0);
    return gx;
  }
  std::string describe() const override { return "relu"; }

 private:
  std::vector<bool> mask_;
};

template <typename T>
class TanhLayer final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    out_ = Tensor<T>(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) out_[i] = std::tanh(x[i]);
    return out_;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(gy.shape());
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] = gy[i] * (T(1) - out_[i] * out_[i]);
    return gx;
  }
  std::string describe() const override { return "tanh"; }

 private:
  Tensor<T> out_;
};

// Softmax over the last dimension.
template <typename T>
class Softmax final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const std::size_t C = x.dim(x.rank() - 1);
    const std::size_t rows = x.numel() / C;
    out_ = Tensor<T>(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
      const T* in = x.data() + r * C;
      T* out = out_.data() + r * C;
      T mx = in[0];
      for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, in[c]);
      T sum = T(0);
      for (std::size_t c = 0; c < C; ++c) sum += out[c] = std::exp(in[c] - mx);
      for (std::size_t c = 0; c < C; ++c) out[c] /= sum;
    }
    return out_;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t C = gy.dim(gy.rank() - 1);
    const std::size_t rows = gy.numel() / C;
    Tensor<T> gx(gy.shape());
    for (std::size_t r = 0; r < rows; ++r) {
      const T* y = out_.data() + r * C;
      const T* g = gy.data() + r * C;
      T dot = T(0);
      for (std::size_t c = 0; c < C; ++c) dot += g[c] * y[c];
      for (std::size_t c = 0; c < C; ++c) gx.data()[r * C + c] = y[c] * (g[c] - dot);
    }
    return gx;
  }
  std::string describe() const override { return "softmax"; }

 private:
  Tensor<T> out_;
};

// Inverted dropout: zero with probability 1-keep, scale survivors by 1/keep
// at train time; identity at evaluation time.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(double keep_prob, std::uint64_t seed) : keep_(keep_prob), rng_(seed) {
    if (keep_prob <= 0.0 || keep_prob > 1.0)
      throw std::invalid_argument("dropout: keep probability must be in (0, 1]");
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    if (!train || keep_ == 1.0) {
      mask_.clear();
      return x;
    }
    mask_.assign(x.numel(), T(0));
    Tensor<T> y(x.shape());
    const T scale = T(1.0 / keep_);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (rng_.bernoulli(keep_)) mask_[i] = scale;
      y[i] = x[i] * mask_[i];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    if (mask_.empty()) return gy;
    Tensor<T> gx(gy.shape());
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] = gy[i] * mask_[i];
    return gx;
  }

  std::string describe() const override { return "dropout keep=" + std::to_string(keep_); }

 private:
  double keep_;
  Rng rng_;
  std::vector<T> mask_;
};

// Fixed per-sample reshape (e.g. [B,60,T] -> [B,1,60,T]).
template <typename T>
class Reshape final : public Layer<T> {
 public:
  explicit Reshape(std::vector<std::size_t> per_sample) : target_(std::move(per_sample)) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape();
    std::vector<std::size_t> s{x.dim(0)};
    s.insert(s.end(), target_.begin(), target_.end());
    Tensor<T> y = x;
    y.reshape(s);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    gx.reshape(in_shape_);
    return gx;
  }
  std::string describe() const override {
    std::string s = "reshape";
    for (auto d : target_) s += " " + std::to_string(d);
    return s;
  }

 private:
  std::vector<std::size_t> target_;
  std::vector<std::size_t> in_shape_;
};

}  // namespace mstnet::nn
