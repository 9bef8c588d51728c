#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mstnet/audio/folds.hpp"
#include "mstnet/audio/resample.hpp"
#include "mstnet/audio/wav.hpp"
#include "mstnet/exp/config.hpp"
#include "mstnet/feat/augment.hpp"
#include "mstnet/feat/cache.hpp"
#include "mstnet/feat/melspec.hpp"
#include "mstnet/feat/normalize.hpp"
#include "mstnet/feat/segment.hpp"
#include "mstnet/model/classifier.hpp"
#include "mstnet/model/mst.hpp"
#include "mstnet/nn/rng.hpp"

namespace mstnet::exp {

inline feat::MelParams mel_params(const ExperimentConfig& c) {
  feat::MelParams p;
  p.window_size = c.window;
  p.hop = c.hop;
  p.n_mels = c.n_mels;
  p.sample_rate = c.sample_rate;
  return p;
}

inline feat::SegmentParams segment_params(const ExperimentConfig& c) {
  feat::SegmentParams p;
  p.frame_len = c.segment_frames;
  p.overlap = c.overlap;
  p.silence_threshold = c.silence_threshold;
  p.hop = c.hop;
  return p;
}

// Synthetic stand-in for the real corpus: per-class tones with harmonics and
// a little noise, named and folded by the ESC convention. Deterministic.
inline void generate_smoke_dataset(const std::filesystem::path& dir,
                                   std::size_t n_classes, std::size_t clips_per_class,
                                   std::uint64_t seed, double sample_rate = 22050.0,
                                   double seconds = 5.0) {
  std::filesystem::create_directories(dir);
  nn::Rng rng(seed);
  const std::size_t n = std::size_t(seconds * sample_rate + 0.5);
  int source_id = 100000;
  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    const double base = 300.0 * std::pow(1.5, double(cls));  // well-separated pitches
    for (std::size_t k = 0; k < clips_per_class; ++k) {
      const int fold = int(k % 5) + 1;
      const double detune = 1.0 + 0.02 * rng.uniform(-1.0, 1.0);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      std::vector<double> x(n);
      for (std::size_t t = 0; t < n; ++t) {
        const double w = 2.0 * M_PI * base * detune * double(t) / sample_rate;
        x[t] = 0.55 * std::sin(w + phase) + 0.2 * std::sin(2.0 * w + phase) +
               0.05 * rng.uniform(-1.0, 1.0);
      }
      std::ostringstream name;
      name << fold << "-" << source_id++ << "-A-" << cls << ".wav";
      audio::write_wav_pcm16(dir / name.str(), x, int(sample_rate));
    }
  }
}

// Decode every WAV under the dataset path, resample to the working rate, and
// zero-pad short clips to the full duration. Corrupt files are skipped and
// counted; metadata errors (bad names) are fatal.
inline std::vector<audio::AudioClip> load_clips(const ExperimentConfig& cfg,
                                                std::size_t* skipped = nullptr) {
  if (cfg.dataset_path.empty())
    throw std::runtime_error("dataset path not set (config dataset.path or $MELSEED_DATA)");
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::directory_iterator(cfg.dataset_path))
    if (e.path().extension() == ".wav") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());

  std::vector<audio::AudioClip> clips;
  std::size_t skip_count = 0;
  for (const auto& p : paths) {
    audio::AudioClip clip;
    try {
      clip = audio::decode_wav(p);
    } catch (const audio::MetadataError&) {
      throw;
    } catch (const std::runtime_error&) {
      ++skip_count;  // corrupt or unsupported file: note and move on
      continue;
    }
    if (clip.sample_rate != int(cfg.sample_rate))
      clip = audio::resample(clip, int(cfg.sample_rate));
    if (clip.samples.size() < cfg.clip_samples())
      clip.samples.resize(cfg.clip_samples(), 0.0);
    clips.push_back(std::move(clip));
  }
  if (skipped) *skipped = skip_count;
  return clips;
}

// Prepared-audio layout under artifacts_dir:
//   prepared/{clip_id}.wav            resampled, padded originals
//   prepared/{clip_id}__{tag}.wav     augmented training variants
//   cache/{clip_id}[__{tag}].mstf     log-mel feature cache + segment starts
//   prepared/manifest.csv             clip_id,path,fold,class_label,variant
struct PreparedClip {
  std::string clip_id;
  std::string path;
  int fold = -1;
  int class_label = -1;
  std::string variant;  // empty for originals
};

inline void write_feature_cache(const audio::AudioClip& clip, const ExperimentConfig& cfg,
                                const std::filesystem::path& path) {
  const auto mel = feat::compute_log_mel(clip.samples, mel_params(cfg));
  feat::CacheFile c;
  c.rows = std::uint32_t(mel.n_mels);
  c.cols = std::uint32_t(mel.n_frames);
  c.data.assign(mel.values.begin(), mel.values.end());
  const auto sp = segment_params(cfg);
  for (auto s : feat::segment_starts(mel.n_frames, sp.frame_len, sp.stride_frames()))
    c.segment_starts.push_back(std::uint32_t(s));
  feat::write_cache(c, path);
}

inline std::vector<PreparedClip> prepare_dataset(const ExperimentConfig& cfg) {
  const std::filesystem::path root = cfg.artifacts_dir;
  const auto prepared = root / "prepared";
  const auto cache = root / "cache";
  std::filesystem::create_directories(prepared);
  std::filesystem::create_directories(cache);

  auto clips = load_clips(cfg);
  if (clips.empty()) throw std::runtime_error("no decodable clips in " + cfg.dataset_path);

  std::vector<PreparedClip> manifest;
  auto emit = [&](const audio::AudioClip& c, const std::string& variant) {
    const auto wav_path = prepared / (c.clip_id + ".wav");
    audio::write_wav_pcm16(wav_path, c.samples, int(cfg.sample_rate));
    write_feature_cache(c, cfg, cache / (c.clip_id + ".mstf"));
    manifest.push_back({c.clip_id, wav_path.string(), c.fold, c.class_label, variant});
  };
  for (const auto& clip : clips) {
    emit(clip, "");
    for (auto& var : feat::augment(clip)) {
      var.samples.resize(cfg.clip_samples(), 0.0);
      emit(var, var.clip_id.substr(clip.clip_id.size() + 2));
    }
  }

  std::ofstream os(prepared / "manifest.csv");
  os << "clip_id,path,fold,class_label,variant\n";
  for (const auto& m : manifest)
    os << m.clip_id << "," << m.path << "," << m.fold << "," << m.class_label << ","
       << m.variant << "\n";
  return manifest;
}

inline std::vector<PreparedClip> read_manifest(const ExperimentConfig& cfg) {
  const auto path = std::filesystem::path(cfg.artifacts_dir) / "prepared" / "manifest.csv";
  std::ifstream is(path);
  if (!is) throw std::runtime_error("missing manifest " + path.string() +
                                    " (run `prepare` first)");
  std::vector<PreparedClip> out;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    PreparedClip m;
    std::string fold, cls;
    std::getline(ss, m.clip_id, ',');
    std::getline(ss, m.path, ',');
    std::getline(ss, fold, ',');
    std::getline(ss, cls, ',');
    std::getline(ss, m.variant, ',');
    m.fold = std::stoi(fold);
    m.class_label = std::stoi(cls);
    out.push_back(std::move(m));
  }
  return out;
}

inline audio::AudioClip load_prepared(const PreparedClip& m) {
  auto clip = audio::decode_wav(m.path, false);
  clip.clip_id = m.clip_id;
  clip.fold = m.fold;
  clip.class_label = m.class_label;
  return clip;
}

// ---- training-set assembly -------------------------------------------------

// All regression segments of the given clips; targets are raw (unnormalized)
// log-mel values so statistics can be fitted before normalization.
inline std::vector<feat::Segment> collect_mst_segments(
    const std::vector<PreparedClip>& manifest, const ExperimentConfig& cfg,
    const std::vector<int>& folds, bool include_augmented) {
  std::vector<feat::Segment> out;
  for (const auto& m : manifest) {
    if (std::find(folds.begin(), folds.end(), m.fold) == folds.end()) continue;
    if (!include_augmented && !m.variant.empty()) continue;
    auto clip = load_prepared(m);
    auto segs = feat::segment_clip(clip.samples, mel_params(cfg), segment_params(cfg),
                                   feat::SegmentKind::Regression);
    for (auto& s : segs) {
      s.parent_clip = m.clip_id;
      s.variant = m.variant;
      s.fold = m.fold;
      s.class_label = m.class_label;
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline feat::NormStats fit_target_stats(const std::vector<feat::Segment>& segments) {
  feat::StatsAccumulator acc;
  for (const auto& s : segments) acc.add(s.target_mel.values);
  return acc.finish();
}

inline model::MstData make_mst_data(const std::vector<feat::Segment>& segments,
                                    const feat::NormStats& stats, bool clamp) {
  model::MstData d;
  if (segments.empty()) return d;
  const std::size_t len = segments[0].raw.size();
  const std::size_t tgt = segments[0].target_mel.values.size();
  d.inputs = nn::Tensor<float>({segments.size(), 1, len});
  d.targets = nn::Tensor<float>(
      {segments.size(), segments[0].target_mel.n_mels, segments[0].target_mel.n_frames});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t t = 0; t < len; ++t)
      d.inputs[i * len + t] = float(segments[i].raw[t]);
    for (std::size_t j = 0; j < tgt; ++j)
      d.targets[i * tgt + j] =
          float(feat::apply_norm_scalar(segments[i].target_mel.values[j], stats, clamp));
  }
  return d;
}

inline std::vector<feat::Segment> collect_clf_segments(
    const std::vector<PreparedClip>& manifest, const ExperimentConfig& cfg,
    const std::vector<int>& folds, bool include_augmented, bool keep_loudest) {
  std::vector<feat::Segment> out;
  for (const auto& m : manifest) {
    if (std::find(folds.begin(), folds.end(), m.fold) == folds.end()) continue;
    if (!include_augmented && !m.variant.empty()) continue;
    auto clip = load_prepared(m);
    auto segs = feat::segment_clip(clip.samples, mel_params(cfg), segment_params(cfg),
                                   feat::SegmentKind::Classification, keep_loudest);
    for (auto& s : segs) {
      s.parent_clip = m.clip_id;
      s.variant = m.variant;
      s.fold = m.fold;
      s.class_label = m.class_label;
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline feat::NormStats fit_input_mel_stats(const std::vector<feat::Segment>& segments) {
  feat::StatsAccumulator acc;
  for (const auto& s : segments) acc.add(s.input_mel.values);
  return acc.finish();
}

// Mel-input tensor [N, 1, 60, frames] for the baseline variant.
inline model::ClfData make_clf_mel_data(const std::vector<feat::Segment>& segments,
                                        const feat::NormStats& stats, bool clamp) {
  model::ClfData d;
  if (segments.empty()) return d;
  const std::size_t rows = segments[0].input_mel.n_mels;
  const std::size_t cols = segments[0].input_mel.n_frames;
  d.inputs = nn::Tensor<float>({segments.size(), 1, rows, cols});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    d.labels.push_back(segments[i].class_label);
    for (std::size_t j = 0; j < rows * cols; ++j)
      d.inputs[i * rows * cols + j] =
          float(feat::apply_norm_scalar(segments[i].input_mel.values[j], stats, clamp));
  }
  return d;
}

// Raw-waveform tensor [N, 1, samples] for the stacked variants.
inline model::ClfData make_clf_raw_data(const std::vector<feat::Segment>& segments) {
  model::ClfData d;
  if (segments.empty()) return d;
  const std::size_t len = segments[0].raw.size();
  d.inputs = nn::Tensor<float>({segments.size(), 1, len});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    d.labels.push_back(segments[i].class_label);
    for (std::size_t t = 0; t < len; ++t)
      d.inputs[i * len + t] = float(segments[i].raw[t]);
  }
  return d;
}

}  // namespace mstnet::exp
