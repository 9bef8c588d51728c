#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mstnet/dsp/fft.hpp"

namespace mstnet::dsp {

// Periodic Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * double(i) / double(n)));
  return w;
}

// Reflect (no edge duplication) index fold into [0, len).
inline std::size_t reflect_index(long long i, std::size_t len) {
  const long long n = static_cast<long long>(len);
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return static_cast<std::size_t>(i);
}

struct StftConfig {
  std::size_t window_size = 1024;
  std::size_t hop = 512;
};

// Centered frame count: 1 + floor(len / hop).
inline std::size_t stft_frame_count(std::size_t len, std::size_t hop) {
  return 1 + len / hop;
}

// Complex STFT with centered reflection-padded framing.
// Column t covers padded samples [t*hop, t*hop + window).
inline std::vector<std::vector<std::complex<double>>> stft_complex(
    const std::vector<double>& signal, const StftConfig& cfg = {}) {
  if (signal.empty()) throw std::invalid_argument("stft: empty signal");
  const std::size_t win = cfg.window_size;
  const std::size_t hop = cfg.hop;
  const std::size_t n_frames = stft_frame_count(signal.size(), hop);
  const auto w = hann_window(win);
  const long long pad = static_cast<long long>(win / 2);

  std::vector<std::vector<std::complex<double>>> out(n_frames);
  std::vector<double> frame(win);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const long long start = static_cast<long long>(t * hop) - pad;
    for (std::size_t i = 0; i < win; ++i)
      frame[i] =
          w[i] * signal[reflect_index(start + static_cast<long long>(i), signal.size())];
    out[t] = rfft(frame);
  }
  return out;
}

// Magnitude spectrogram, (window/2 + 1) bins x n_frames, row-major by bin.
inline std::vector<double> stft_magnitude(const std::vector<double>& signal,
                                          const StftConfig& cfg, std::size_t& n_bins,
                                          std::size_t& n_frames) {
  const auto cols = stft_complex(signal, cfg);
  n_bins = cfg.window_size / 2 + 1;
  n_frames = cols.size();
  std::vector<double> mag(n_bins * n_frames);
  for (std::size_t t = 0; t < n_frames; ++t)
    for (std::size_t k = 0; k < n_bins; ++k) mag[k * n_frames + t] = std::abs(cols[t][k]);
  return mag;
}

// Inverse STFT of centered frames, normalized by the squared-window envelope.
inline std::vector<double> istft(
    const std::vector<std::vector<std::complex<double>>>& cols,
    std::size_t window_size, std::size_t hop, std::size_t out_len) {
  if (cols.empty()) return std::vector<double>(out_len, 0.0);
  const auto w = hann_window(window_size);
  const std::size_t pad = window_size / 2;
  const std::size_t full = (cols.size() - 1) * hop + window_size;

  std::vector<double> acc(full, 0.0), wss(full, 0.0);
  for (std::size_t t = 0; t < cols.size(); ++t) {
    const auto frame = irfft(cols[t], window_size);
    const std::size_t off = t * hop;
    for (std::size_t i = 0; i < window_size; ++i) {
      acc[off + i] += frame[i] * w[i];
      wss[off + i] += w[i] * w[i];
    }
  }
  std::vector<double> out(out_len, 0.0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = i + pad;
    if (j < full && wss[j] > 1e-12) out[i] = acc[j] / wss[j];
  }
  return out;
}

}  // namespace mstnet::dsp
