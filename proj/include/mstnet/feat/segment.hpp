#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mstnet/feat/melspec.hpp"
#include "mstnet/feat/normalize.hpp"

namespace mstnet::feat {

struct SegmentParams {
  std::size_t frame_len = 101;      // mel frames per segment
  double overlap = 0.5;             // 50% -> stride of 50 frames
  double silence_threshold = 1e-3;  // max-abs below this, pre-normalization, is silent
  std::size_t hop = 512;

  std::size_t stride_frames() const {
    return std::size_t(double(frame_len - 1) * (1.0 - overlap)) + 0;
  }
};

// One raw-waveform slice paired with its regression target or class label.
struct Segment {
  std::vector<double> raw;  // amplitude-normalized so max |raw| == 1 (unless all-zero)
  MelSpectrogram target_mel;  // spectrogram-regression target (empty for classification)
  MelSpectrogram input_mel;   // classifier mel input (empty for regression use)
  std::string parent_clip;
  std::string variant;
  int class_label = -1;
  int fold = -1;
  std::size_t start_frame = 0;
  double peak = 0.0;  // max-abs before normalization
};

inline std::vector<std::size_t> segment_starts(std::size_t clip_frames,
                                               std::size_t frame_len, std::size_t stride) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + frame_len <= clip_frames; s += stride) starts.push_back(s);
  return starts;
}

enum class SegmentKind {
  Regression,     // raw 100*hop samples, target = per-slice log-mel minus last frame
  Classification  // raw frame_len*hop samples, input = first frame_len log-mel frames
};

// Cut a clip into overlapping segments on the clip's frame grid; drop silent
// slices and trailing partial windows, then normalize each slice by its own
// peak. When keep_loudest_if_all_silent is set and every slice is silent, the
// single highest-peak slice is kept so evaluation always has one vote.
inline std::vector<Segment> segment_clip(const std::vector<double>& raw,
                                         const MelParams& mel_params,
                                         const SegmentParams& params, SegmentKind kind,
                                         bool keep_loudest_if_all_silent = false) {
  const std::size_t hop = mel_params.hop;
  const std::size_t clip_frames = raw.empty() ? 0 : dsp::stft_frame_count(raw.size(), hop);
  const std::size_t raw_len = (kind == SegmentKind::Regression)
                                  ? (params.frame_len - 1) * hop
                                  : params.frame_len * hop;

  std::vector<Segment> out;
  Segment loudest;
  bool have_any = false;
  for (std::size_t start : segment_starts(clip_frames, params.frame_len,
                                           params.stride_frames())) {
    const std::size_t s0 = start * hop;
    if (s0 + raw_len > raw.size()) break;  // trailing partial slice

    Segment seg;
    seg.start_frame = start;
    seg.raw.assign(raw.begin() + long(s0), raw.begin() + long(s0 + raw_len));
    for (double v : seg.raw) seg.peak = std::max(seg.peak, std::abs(v));

    // Targets/inputs are computed on the slice before amplitude normalization.
    auto mel = compute_log_mel(seg.raw, mel_params);
    if (kind == SegmentKind::Regression) {
      // slice off the last frame: 101-frame label -> 100-frame target
      seg.target_mel.n_mels = mel.n_mels;
      seg.target_mel.n_frames = params.frame_len - 1;
      seg.target_mel.values.resize(mel.n_mels * seg.target_mel.n_frames);
      for (std::size_t m = 0; m < mel.n_mels; ++m)
        for (std::size_t t = 0; t + 1 < params.frame_len; ++t)
          seg.target_mel.at(m, t) = mel.at(m, t);
    } else {
      seg.input_mel.n_mels = mel.n_mels;
      seg.input_mel.n_frames = params.frame_len;
      seg.input_mel.values.resize(mel.n_mels * params.frame_len);
      for (std::size_t m = 0; m < mel.n_mels; ++m)
        for (std::size_t t = 0; t < params.frame_len; ++t)
          seg.input_mel.at(m, t) = mel.at(m, t);
    }
    if (seg.peak > 0.0)
      for (double& v : seg.raw) v /= seg.peak;

    if (seg.peak >= params.silence_threshold) {
      out.push_back(std::move(seg));
    } else if (!have_any || seg.peak > loudest.peak) {
      loudest = std::move(seg);
      have_any = true;
    }
  }
  if (out.empty() && have_any && keep_loudest_if_all_silent) out.push_back(std::move(loudest));
  return out;
}

}  // namespace mstnet::feat
