#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mstnet/audio/wav.hpp"

namespace mstnet::audio {

namespace detail {

inline double bessel_i0(double x) {
  // Series expansion; converges quickly for the beta range used here.
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / double(k * k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

}  // namespace detail

// Band-limited arbitrary-ratio resampler: windowed-sinc kernel (Kaiser
// beta = 12, 32 zero crossings per side at the cutoff), evaluated through a
// polyphase coefficient table with linear phase interpolation.
class SincResampler {
 public:
  explicit SincResampler(double ratio, double beta = 12.0, int zero_crossings = 32,
                         int phases = 512)
      : ratio_(ratio), phases_(phases) {
    if (ratio <= 0.0) throw std::invalid_argument("resample: ratio must be positive");
    const double fc = std::min(1.0, ratio);  // fraction of input Nyquist
    half_taps_ = int(std::ceil(double(zero_crossings) / fc));
    const int width = 2 * half_taps_ + 1;
    const double i0b = detail::bessel_i0(beta);
    table_.assign(std::size_t(phases + 1) * width, 0.0);
    for (int p = 0; p <= phases; ++p) {
      const double frac = double(p) / double(phases);
      for (int k = 0; k < width; ++k) {
        const double tau = frac + double(half_taps_ - k);
        const double u = tau / double(half_taps_);
        if (std::abs(u) > 1.0) continue;
        const double win = detail::bessel_i0(beta * std::sqrt(1.0 - u * u)) / i0b;
        table_[std::size_t(p) * width + k] = fc * detail::sinc(fc * tau) * win;
      }
    }
  }

  // Output length round(len * ratio); samples outside the input are zero.
  std::vector<double> apply(const std::vector<double>& x) const {
    const std::size_t out_len = std::size_t(std::llround(double(x.size()) * ratio_));
    std::vector<double> y(out_len, 0.0);
    const int width = 2 * half_taps_ + 1;
    const long long n = static_cast<long long>(x.size());
    for (std::size_t m = 0; m < out_len; ++m) {
      const double t = double(m) / ratio_;
      const long long i0 = static_cast<long long>(std::floor(t));
      const double frac = t - double(i0);
      const double fp = frac * double(phases_);
      const int p = std::min(int(fp), phases_ - 1);
      const double a = fp - double(p);
      const double* h0 = &table_[std::size_t(p) * width];
      const double* h1 = h0 + width;
      double acc = 0.0;
      for (int k = 0; k < width; ++k) {
        const long long j = i0 - half_taps_ + k;
        if (j < 0 || j >= n) continue;
        acc += x[std::size_t(j)] * ((1.0 - a) * h0[k] + a * h1[k]);
      }
      y[m] = acc;
    }
    return y;
  }

 private:
  double ratio_;
  int phases_;
  int half_taps_ = 0;
  std::vector<double> table_;
};

inline std::vector<double> resample_signal(const std::vector<double>& x, double in_rate,
                                           double out_rate) {
  if (in_rate <= 0.0 || out_rate <= 0.0)
    throw std::invalid_argument("resample: rates must be positive");
  if (in_rate == out_rate) return x;
  return SincResampler(out_rate / in_rate).apply(x);
}

inline AudioClip resample(const AudioClip& clip, int target_rate) {
  AudioClip out = clip;
  out.samples = resample_signal(clip.samples, double(clip.sample_rate), double(target_rate));
  out.sample_rate = target_rate;
  return out;
}

}  // namespace mstnet::audio
