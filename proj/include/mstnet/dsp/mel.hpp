#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mstnet::dsp {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
inline double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

inline double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

// Triangular mel filterbank, n_mels x (n_fft/2 + 1), row-major.
// Centers are uniform in Slaney mel between 0 Hz and sample_rate/2, and each
// triangle is area-normalized by 2/(f_hi - f_lo).
inline std::vector<double> mel_filterbank(std::size_t n_mels, std::size_t n_fft,
                                          double sample_rate) {
  if (n_mels < 1) throw std::invalid_argument("mel_filterbank: n_mels < 1");
  if (n_fft % 2 != 0) throw std::invalid_argument("mel_filterbank: n_fft must be even");
  const std::size_t n_bins = n_fft / 2 + 1;
  const double fmax = sample_rate / 2.0;

  std::vector<double> f(n_mels + 2);
  const double mel_max = hz_to_mel(fmax);
  for (std::size_t i = 0; i < n_mels + 2; ++i)
    f[i] = mel_to_hz(mel_max * double(i) / double(n_mels + 1));

  std::vector<double> fb(n_mels * n_bins, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = f[m], mid = f[m + 1], hi = f[m + 2];
    const double norm = 2.0 / (hi - lo);
    bool any = false;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double fk = sample_rate * double(k) / double(n_fft);
      const double up = (fk - lo) / (mid - lo);
      const double down = (hi - fk) / (hi - mid);
      const double w = std::max(0.0, std::min(up, down));
      if (w > 0.0) any = true;
      fb[m * n_bins + k] = w * norm;
    }
    if (!any)
      throw std::invalid_argument("mel_filterbank: empty filter, n_mels too large for n_fft");
  }
  return fb;
}

// ln(filterbank . magnitude + eps), n_mels x n_frames.
inline std::vector<double> log_mel(const std::vector<double>& mag, std::size_t n_bins,
                                   std::size_t n_frames, const std::vector<double>& fb,
                                   std::size_t n_mels, double eps = 1e-10) {
  if (fb.size() != n_mels * n_bins || mag.size() != n_bins * n_frames)
    throw std::invalid_argument("log_mel: shape mismatch");
  std::vector<double> out(n_mels * n_frames);
  for (std::size_t m = 0; m < n_mels; ++m)
    for (std::size_t t = 0; t < n_frames; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k)
        acc += fb[m * n_bins + k] * mag[k * n_frames + t];
      out[m * n_frames + t] = std::log(acc + eps);
    }
  return out;
}

}  // namespace mstnet::dsp
