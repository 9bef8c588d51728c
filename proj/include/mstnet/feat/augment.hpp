#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "mstnet/audio/resample.hpp"
#include "mstnet/audio/wav.hpp"
#include "mstnet/dsp/stft.hpp"

namespace mstnet::feat {

namespace detail {

inline double wrap_phase(double x) {
  constexpr double two_pi = 2.0 * dsp::kPi;
  x = std::fmod(x + dsp::kPi, two_pi);
  if (x < 0) x += two_pi;
  return x - dsp::kPi;
}

}  // namespace detail

// Phase-vocoder time stretch. rate > 1 shortens, rate < 1 lengthens; output
// length is floor(len / rate). rate == 1 reproduces the input.
inline std::vector<double> time_stretch(const std::vector<double>& x, double rate,
                                        std::size_t window = 1024, std::size_t hop = 256) {
  if (x.empty() || rate <= 0.0) return {};
  const std::size_t out_len = std::size_t(double(x.size()) / rate);
  auto D = dsp::stft_complex(x, {window, hop});
  const std::size_t T = D.size();
  const std::size_t n_bins = window / 2 + 1;

  std::vector<double> phi_advance(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    phi_advance[k] = 2.0 * dsp::kPi * double(hop) * double(k) / double(window);

  std::vector<double> phase_acc(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) phase_acc[k] = std::arg(D[0][k]);

  const std::vector<std::complex<double>> zero_frame(n_bins, {0.0, 0.0});
  std::vector<std::vector<std::complex<double>>> out_cols;
  for (double ts = 0.0; ts < double(T); ts += rate) {
    const std::size_t t0 = std::size_t(ts);
    const double frac = ts - double(t0);
    const auto& a = D[t0];
    const auto& b = (t0 + 1 < T) ? D[t0 + 1] : zero_frame;

    std::vector<std::complex<double>> col(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag = (1.0 - frac) * std::abs(a[k]) + frac * std::abs(b[k]);
      col[k] = std::polar(mag, phase_acc[k]);
      const double dphi = detail::wrap_phase(std::arg(b[k]) - std::arg(a[k]) - phi_advance[k]);
      phase_acc[k] += phi_advance[k] + dphi;
    }
    out_cols.push_back(std::move(col));
  }
  return dsp::istft(out_cols, window, hop, out_len);
}

// Pitch shift by semitones, preserving length: resample to change pitch, then
// time-stretch the duration back.
inline std::vector<double> pitch_shift(const std::vector<double>& x, double semitones) {
  const double factor = std::pow(2.0, semitones / 12.0);
  auto shifted = audio::SincResampler(1.0 / factor).apply(x);
  auto stretched = time_stretch(shifted, 1.0 / factor);
  stretched.resize(x.size(), 0.0);
  return stretched;
}

// The four training-time variants of a clip. Outputs are padded/truncated to
// the input length; tags identify the variant in caches and provenance checks.
inline std::vector<audio::AudioClip> augment(const audio::AudioClip& clip) {
  struct Spec {
    const char* tag;
    bool is_stretch;
    double value;
  };
  static constexpr Spec kVariants[] = {
      {"ts0.8", true, 0.8}, {"ts1.2", true, 1.2}, {"ps-2", false, -2.0}, {"ps+2", false, 2.0}};

  std::vector<audio::AudioClip> out;
  for (const auto& v : kVariants) {
    audio::AudioClip var = clip;
    var.samples = v.is_stretch ? time_stretch(clip.samples, v.value)
                               : pitch_shift(clip.samples, v.value);
    var.samples.resize(clip.samples.size(), 0.0);
    var.clip_id = clip.clip_id + "__" + v.tag;
    out.push_back(std::move(var));
  }
  return out;
}

}  // namespace mstnet::feat
