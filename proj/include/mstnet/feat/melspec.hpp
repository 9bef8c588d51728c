#pragma once

#include <cstddef>
#include <vector>

#include "mstnet/dsp/mel.hpp"
#include "mstnet/dsp/stft.hpp"

namespace mstnet::feat {

struct MelParams {
  std::size_t window_size = 1024;
  std::size_t hop = 512;
  std::size_t n_mels = 60;
  double sample_rate = 22050.0;
  double eps = 1e-10;
};

// Log-scaled mel magnitudes, n_mels rows x n_frames columns, row-major.
struct MelSpectrogram {
  std::size_t n_mels = 0;
  std::size_t n_frames = 0;
  std::vector<double> values;

  double at(std::size_t m, std::size_t t) const { return values[m * n_frames + t]; }
  double& at(std::size_t m, std::size_t t) { return values[m * n_frames + t]; }
};

inline MelSpectrogram compute_log_mel(const std::vector<double>& signal,
                                      const MelParams& p = {}) {
  std::size_t n_bins = 0, n_frames = 0;
  const auto mag =
      dsp::stft_magnitude(signal, {p.window_size, p.hop}, n_bins, n_frames);
  const auto fb = dsp::mel_filterbank(p.n_mels, p.window_size, p.sample_rate);
  MelSpectrogram mel;
  mel.n_mels = p.n_mels;
  mel.n_frames = n_frames;
  mel.values = dsp::log_mel(mag, n_bins, n_frames, fb, p.n_mels, p.eps);
  return mel;
}

// Same transform with a prebuilt filterbank (the filterbank is static per run).
inline MelSpectrogram compute_log_mel(const std::vector<double>& signal,
                                      const std::vector<double>& fb, const MelParams& p) {
  std::size_t n_bins = 0, n_frames = 0;
  const auto mag =
      dsp::stft_magnitude(signal, {p.window_size, p.hop}, n_bins, n_frames);
  MelSpectrogram mel;
  mel.n_mels = p.n_mels;
  mel.n_frames = n_frames;
  mel.values = dsp::log_mel(mag, n_bins, n_frames, fb, p.n_mels, p.eps);
  return mel;
}

}  // namespace mstnet::feat
