#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstnet/exp/config.hpp"
#include "mstnet/exp/dataset.hpp"
#include "mstnet/exp/png.hpp"
#include "mstnet/exp/report.hpp"
#include "mstnet/model/classifier.hpp"
#include "mstnet/model/mst.hpp"

namespace mstnet::exp {

// A required earlier-stage output (checkpoint, stats, manifest) is absent.
// The CLI maps this to exit code 3.
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int validation_fold_for(int test_fold) { return (test_fold % 5) + 1; }

// ---- artifact paths ---------------------------------------------------------

inline std::filesystem::path art_root(const ExperimentConfig& c) {
  return c.artifacts_dir;
}
inline std::filesystem::path mst_ckpt_path(const ExperimentConfig& c, int fold) {
  return art_root(c) / ("mst_fold" + std::to_string(fold) + ".ckpt");
}
inline std::filesystem::path mst_curve_path(const ExperimentConfig& c, int fold) {
  return art_root(c) / ("mst_fold" + std::to_string(fold) + "_curve.csv");
}
inline std::filesystem::path mst_stats_path(const ExperimentConfig& c, int fold) {
  return art_root(c) / ("norm_mst_fold" + std::to_string(fold) + ".json");
}
inline std::filesystem::path clf_ckpt_path(const ExperimentConfig& c,
                                           const std::string& variant, int fold,
                                           bool best = false) {
  return art_root(c) / ("clf_" + variant + "_fold" + std::to_string(fold) +
                        (best ? "_best" : "") + ".ckpt");
}
inline std::filesystem::path clf_curve_path(const ExperimentConfig& c,
                                            const std::string& variant, int fold) {
  return art_root(c) / ("clf_" + variant + "_fold" + std::to_string(fold) + "_curve.csv");
}
inline std::filesystem::path clf_stats_path(const ExperimentConfig& c, int fold) {
  return art_root(c) / ("norm_clf_fold" + std::to_string(fold) + ".json");
}

inline void save_stats(const feat::NormStats& s, const std::filesystem::path& path) {
  nlohmann::json j = {
      {"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

inline feat::NormStats load_stats(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is)
    throw MissingArtifactError("missing normalization stats " + path.string() +
                               " (run the training stage first)");
  nlohmann::json j;
  is >> j;
  feat::NormStats s;
  s.mean = j.at("mean");
  s.stddev = j.at("stddev");
  s.min = j.at("min");
  s.max = j.at("max");
  return s;
}

inline nn::Checkpoint load_ckpt_or_die(const std::filesystem::path& path,
                                       const std::string& stage_hint) {
  if (!std::filesystem::exists(path))
    throw MissingArtifactError("missing checkpoint " + path.string() + " (run `" +
                               stage_hint + "` first)");
  return nn::load_checkpoint(path);
}

// ---- per-stage operations ---------------------------------------------------

inline std::vector<PreparedClip> require_manifest(const ExperimentConfig& cfg) {
  try {
    return read_manifest(cfg);
  } catch (const std::runtime_error& e) {
    throw MissingArtifactError(e.what());
  }
}

// Train the mel-transform network for one test fold and persist its
// checkpoint, training curve, and target-normalization stats.
inline model::MstTrainResult train_mst_for_fold(const ExperimentConfig& cfg,
                                                const std::vector<PreparedClip>& manifest,
                                                int fold) {
  const int val_fold = validation_fold_for(fold);
  const auto fa = audio::make_fold_assignment(fold, val_fold);

  auto train_segs = collect_mst_segments(manifest, cfg, fa.train_folds, cfg.augment_mst);
  auto val_segs = collect_mst_segments(manifest, cfg, {val_fold}, false);
  if (train_segs.empty()) throw std::runtime_error("no MST training segments");

  const auto stats = fit_target_stats(train_segs);
  const auto train = make_mst_data(train_segs, stats, false);
  const auto val = make_mst_data(val_segs, stats, true);

  auto m = model::build_mst<float>(cfg.seed * 100 + std::uint64_t(fold));
  model::MstTrainConfig tc;
  tc.lr = cfg.mst_lr;
  tc.batch = cfg.mst_batch;
  tc.max_epochs = cfg.mst_max_epochs;
  tc.patience = cfg.mst_patience;
  tc.shuffle_seed = cfg.seed * 1000 + std::uint64_t(fold);
  auto res = model::train_mst(m, train, val, tc);

  std::filesystem::create_directories(art_root(cfg));
  nn::save_checkpoint(res.best, mst_ckpt_path(cfg, fold));
  model::write_curve_csv(res.curve, mst_curve_path(cfg, fold));
  save_stats(stats, mst_stats_path(cfg, fold));
  return res;
}

inline std::uint64_t clf_seed(const ExperimentConfig& cfg, model::InitVariant v, int fold) {
  return cfg.seed * 100 + std::uint64_t(fold) * 10 + std::uint64_t(v);
}

// Train one classifier variant for one test fold; persists final and
// best-validation checkpoints, the training curve, and (once per fold) the
// classifier mel-normalization stats.
inline model::ClfTrainResult train_clf_for_fold(const ExperimentConfig& cfg,
                                                const std::vector<PreparedClip>& manifest,
                                                model::InitVariant variant, int fold) {
  const int val_fold = validation_fold_for(fold);
  const auto fa = audio::make_fold_assignment(fold, val_fold);

  auto train_segs = collect_clf_segments(manifest, cfg, fa.train_folds, true, false);
  auto val_segs = collect_clf_segments(manifest, cfg, {val_fold}, false, false);
  if (train_segs.empty()) throw std::runtime_error("no classifier training segments");

  model::ClfData train, val;
  if (variant == model::InitVariant::MEL_BASELINE) {
    const auto stats = fit_input_mel_stats(train_segs);
    std::filesystem::create_directories(art_root(cfg));
    save_stats(stats, clf_stats_path(cfg, fold));
    train = make_clf_mel_data(train_segs, stats, false);
    val = make_clf_mel_data(val_segs, stats, true);
  } else {
    train = make_clf_raw_data(train_segs);
    val = make_clf_raw_data(val_segs);
  }

  nn::Checkpoint mst_ck;
  const nn::Checkpoint* mst_ptr = nullptr;
  if (variant == model::InitVariant::RAW_PRETRAINED_FROZEN) {
    mst_ck = load_ckpt_or_die(mst_ckpt_path(cfg, fold), "train-mst");
    mst_ptr = &mst_ck;
  }
  auto m = model::build_classifier<float>(variant, clf_seed(cfg, variant, fold), mst_ptr);

  model::ClfTrainConfig tc;
  tc.lr = cfg.clf_lr;
  tc.momentum = cfg.clf_momentum;
  tc.batch = cfg.clf_batch;
  tc.epochs = cfg.clf_epochs;
  tc.shuffle_seed = cfg.seed * 2000 + std::uint64_t(fold) * 10 + std::uint64_t(variant);
  auto res = model::train_classifier(m, train, val, tc);

  const auto name = model::variant_name(variant);
  std::filesystem::create_directories(art_root(cfg));
  nn::save_checkpoint(res.final, clf_ckpt_path(cfg, name, fold, false));
  nn::save_checkpoint(res.best, clf_ckpt_path(cfg, name, fold, true));
  model::write_clf_curve_csv(res.curve, clf_curve_path(cfg, name, fold));
  return res;
}

inline std::filesystem::path eval_path(const ExperimentConfig& c,
                                       const std::string& variant, int fold) {
  return art_root(c) / ("eval_" + variant + "_fold" + std::to_string(fold) + ".json");
}

inline void save_fold_result(const ExperimentConfig& cfg, const std::string& variant,
                             const FoldResult& r) {
  nlohmann::json j = {{"fold", r.fold},
                      {"validation_fold", r.validation_fold},
                      {"majority_accuracy", r.majority_accuracy},
                      {"probability_accuracy", r.probability_accuracy}};
  std::ofstream os(eval_path(cfg, variant, r.fold));
  os << j.dump(2) << "\n";
}

inline FoldResult load_fold_result(const ExperimentConfig& cfg, const std::string& variant,
                                   int fold) {
  std::ifstream is(eval_path(cfg, variant, fold));
  if (!is)
    throw MissingArtifactError("missing evaluation result for " + variant + " fold " +
                               std::to_string(fold) + " (run `evaluate` first)");
  nlohmann::json j;
  is >> j;
  FoldResult r;
  r.fold = j.at("fold");
  r.validation_fold = j.at("validation_fold");
  r.majority_accuracy = j.at("majority_accuracy");
  r.probability_accuracy = j.at("probability_accuracy");
  return r;
}

// Evaluate a trained variant on its test fold with both voting schemes,
// accumulating a confusion matrix (majority voting) over clips.
inline FoldResult evaluate_fold(const ExperimentConfig& cfg,
                                const std::vector<PreparedClip>& manifest,
                                model::InitVariant variant, int fold) {
  const auto name = model::variant_name(variant);
  const auto ck = load_ckpt_or_die(clf_ckpt_path(cfg, name, fold, false), "train-clf");

  nn::Checkpoint mst_ck;
  const nn::Checkpoint* mst_ptr = nullptr;
  if (variant == model::InitVariant::RAW_PRETRAINED_FROZEN) {
    mst_ck = load_ckpt_or_die(mst_ckpt_path(cfg, fold), "train-mst");
    mst_ptr = &mst_ck;
  }
  auto m = model::build_classifier<float>(variant, clf_seed(cfg, variant, fold), mst_ptr);
  nn::restore(m, ck);

  feat::NormStats mel_stats;
  if (variant == model::InitVariant::MEL_BASELINE)
    mel_stats = load_stats(clf_stats_path(cfg, fold));

  FoldResult res;
  res.fold = fold;
  res.validation_fold = validation_fold_for(fold);
  res.confusion.assign(50, std::vector<std::size_t>(50, 0));

  std::size_t n_clips = 0, correct_major = 0, correct_prob = 0;
  for (const auto& entry : manifest) {
    if (entry.fold != fold || !entry.variant.empty()) continue;  // originals only
    auto clip = load_prepared(entry);
    auto segs = feat::segment_clip(clip.samples, mel_params(cfg), segment_params(cfg),
                                   feat::SegmentKind::Classification, true);
    if (segs.empty()) continue;  // shorter than one window; nothing to vote on

    model::ClfData data;
    if (variant == model::InitVariant::MEL_BASELINE)
      data = make_clf_mel_data(segs, mel_stats, true);
    else
      data = make_clf_raw_data(segs);

    const auto probs = model::predict_probs(m, data.inputs);
    const int pred_major = model::vote(probs, model::Voting::Majority);
    const int pred_prob = model::vote(probs, model::Voting::Probability);
    ++n_clips;
    if (pred_major == entry.class_label) ++correct_major;
    if (pred_prob == entry.class_label) ++correct_prob;
    res.confusion[std::size_t(entry.class_label)][std::size_t(pred_major)]++;
  }
  if (n_clips == 0) throw std::runtime_error("no test clips in fold " + std::to_string(fold));
  res.majority_accuracy = double(correct_major) / double(n_clips);
  res.probability_accuracy = double(correct_prob) / double(n_clips);

  write_confusion_csv(res.confusion, art_root(cfg) / ("confusion_" + std::string(name) +
                                                      "_fold" + std::to_string(fold) +
                                                      ".csv"));
  save_fold_result(cfg, name, res);
  return res;
}

// ---- figure emission ----------------------------------------------------------

// Target-vs-prediction mel grids for one test clip segment: CSV twins, a
// side-by-side grayscale PNG on a shared color scale, and the scalar MSE.
inline double emit_comparison_figure(const ExperimentConfig& cfg,
                                     const std::vector<PreparedClip>& manifest, int fold,
                                     const std::string& clip_id = "") {
  const auto ck = load_ckpt_or_die(mst_ckpt_path(cfg, fold), "train-mst");
  const auto stats = load_stats(mst_stats_path(cfg, fold));
  auto m = model::build_mst<float>(0);
  nn::restore(m, ck);

  const PreparedClip* probe = nullptr;
  for (const auto& entry : manifest)
    if (entry.fold == fold && entry.variant.empty() &&
        (clip_id.empty() || entry.clip_id == clip_id)) {
      probe = &entry;
      break;
    }
  if (!probe)
    throw std::runtime_error(clip_id.empty()
                                 ? "no test clip for figure in fold " + std::to_string(fold)
                                 : "clip " + clip_id + " not found in fold " +
                                       std::to_string(fold));

  auto clip = load_prepared(*probe);
  auto segs = feat::segment_clip(clip.samples, mel_params(cfg), segment_params(cfg),
                                 feat::SegmentKind::Regression, true);
  if (segs.empty()) throw std::runtime_error("probe clip has no segments");
  const auto& seg = segs.front();

  std::vector<float> raw(seg.raw.begin(), seg.raw.end());
  const auto pred = model::predict_mel(m, raw);

  const std::size_t rows = seg.target_mel.n_mels, cols = seg.target_mel.n_frames;
  std::vector<double> target(rows * cols);
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = feat::apply_norm_scalar(seg.target_mel.values[i], stats, true);

  double mse = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - double(pred[i]);
    mse += d * d;
  }
  mse /= double(target.size());

  const auto dir = art_root(cfg);
  auto write_grid_csv = [&](const std::filesystem::path& path, auto value_at) {
    std::ofstream os(path);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c) os << ",";
        os << value_at(r * cols + c);
      }
      os << "\n";
    }
  };
  const std::string tag = "fold" + std::to_string(fold);
  write_grid_csv(dir / ("spectrogram_target_" + tag + ".csv"),
                 [&](std::size_t i) { return target[i]; });
  write_grid_csv(dir / ("spectrogram_pred_" + tag + ".csv"),
                 [&](std::size_t i) { return double(pred[i]); });

  // shared gray scale over both grids, 4px gap column
  double lo = target[0], hi = target[0];
  for (double v : target) lo = std::min(lo, v), hi = std::max(hi, v);
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    lo = std::min(lo, double(pred[i]));
    hi = std::max(hi, double(pred[i]));
  }
  const double span = (hi > lo) ? hi - lo : 1.0;
  const std::size_t gap = 4, W = cols * 2 + gap;
  std::vector<std::uint8_t> px(rows * W, 255);
  auto shade = [&](double v) {
    return std::uint8_t(std::clamp((v - lo) / span, 0.0, 1.0) * 255.0);
  };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      px[r * W + c] = shade(target[r * cols + c]);
      px[r * W + cols + gap + c] = shade(double(pred[r * cols + c]));
    }
  write_png_gray(dir / ("spectrogram_comparison_" + tag + ".png"), W, rows, px);

  std::ofstream os(dir / ("spectrogram_mse_" + tag + ".csv"));
  os << "mse\n" << mse << "\n";
  return mse;
}

inline void dump_filters_for_fold(const ExperimentConfig& cfg, int fold) {
  const auto ck = load_ckpt_or_die(mst_ckpt_path(cfg, fold), "train-mst");
  model::export_filters(ck, art_root(cfg) /
                                ("filters_fold" + std::to_string(fold) + ".csv"));
}

// ---- full experiment ----------------------------------------------------------

// One pass over the requested folds and variants: train what is needed,
// evaluate with both voting schemes, and emit every artifact (checkpoints,
// curves, confusion matrices, figure dumps, JSON/CSV report).
inline EvaluationReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  if (c.smoke && c.dataset_path.empty()) {
    const auto dir = art_root(c) / "smoke_data";
    generate_smoke_dataset(dir, c.smoke_classes, c.smoke_clips_per_class, c.seed,
                           c.sample_rate, c.clip_seconds);
    c.dataset_path = dir.string();
  }
  auto manifest = prepare_dataset(c);

  const bool needs_mst =
      std::find(c.variants.begin(), c.variants.end(), "raw_pretrained_frozen") !=
      c.variants.end();

  EvaluationReport report;
  report.config = c;
  for (const auto& vname : c.variants)
    report.variants.push_back({vname, {}});

  for (int fold : c.folds) {
    validate_fold(fold);
    if (needs_mst) {
      train_mst_for_fold(c, manifest, fold);
      dump_filters_for_fold(c, fold);
      emit_comparison_figure(c, manifest, fold);
    }
    for (auto& vres : report.variants) {
      const auto variant = model::parse_variant(vres.variant);
      train_clf_for_fold(c, manifest, variant, fold);
      vres.folds.push_back(evaluate_fold(c, manifest, variant, fold));
    }
  }
  write_report(report, art_root(c));
  return report;
}

}  // namespace mstnet::exp
