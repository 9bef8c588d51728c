#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstnet/exp/config.hpp"

namespace mstnet::exp {

struct FoldResult {
  int fold = 0;
  int validation_fold = 0;
  double majority_accuracy = 0.0;
  double probability_accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted], majority voting
};

struct VariantResult {
  std::string variant;
  std::vector<FoldResult> folds;

  double mean(bool majority) const {
    if (folds.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& f : folds)
      acc += majority ? f.majority_accuracy : f.probability_accuracy;
    return acc / double(folds.size());
  }
  double stddev(bool majority) const {
    if (folds.size() < 2) return 0.0;
    const double mu = mean(majority);
    double acc = 0.0;
    for (const auto& f : folds) {
      const double v = (majority ? f.majority_accuracy : f.probability_accuracy) - mu;
      acc += v * v;
    }
    return std::sqrt(acc / double(folds.size()));
  }
};

struct EvaluationReport {
  ExperimentConfig config;
  std::vector<VariantResult> variants;
};

// Every published hyperparameter with its effective value; overrides from the
// config file are listed separately so deviations are visible at a glance.
inline nlohmann::json config_snapshot(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset"] = {{"path", c.dataset_path},
                  {"artifacts", c.artifacts_dir},
                  {"sample_rate", c.sample_rate},
                  {"clip_seconds", c.clip_seconds}};
  j["stft"] = {{"window", c.window}, {"hop", c.hop}, {"n_mels", c.n_mels}};
  j["segment"] = {{"frames", c.segment_frames},
                  {"overlap", c.overlap},
                  {"silence_threshold", c.silence_threshold}};
  j["augment"] = {{"stretch_low", c.stretch_low},
                  {"stretch_high", c.stretch_high},
                  {"pitch_semitones", c.pitch_semitones},
                  {"mst", c.augment_mst}};
  j["mst"] = {{"optimizer", "adam"},
              {"lr", c.mst_lr},
              {"batch", c.mst_batch},
              {"max_epochs", c.mst_max_epochs},
              {"patience", c.mst_patience}};
  j["clf"] = {{"optimizer", "sgd_nesterov"},
              {"lr", c.clf_lr},
              {"momentum", c.clf_momentum},
              {"batch", c.clf_batch},
              {"epochs", c.clf_epochs},
              {"dropout_keep", c.dropout_keep}};
  j["run"] = {{"seed", c.seed},
              {"folds", c.folds},
              {"variants", c.variants},
              {"smoke", c.smoke}};
  j["overrides"] = c.overrides;
  return j;
}

inline nlohmann::json report_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["config"] = config_snapshot(r.config);
  for (const auto& v : r.variants) {
    nlohmann::json vj;
    vj["variant"] = v.variant;
    vj["mean_majority_accuracy"] = v.mean(true);
    vj["mean_probability_accuracy"] = v.mean(false);
    vj["std_majority_accuracy"] = v.stddev(true);
    vj["std_probability_accuracy"] = v.stddev(false);
    for (const auto& f : v.folds) {
      vj["folds"].push_back({{"fold", f.fold},
                             {"validation_fold", f.validation_fold},
                             {"majority_accuracy", f.majority_accuracy},
                             {"probability_accuracy", f.probability_accuracy}});
    }
    j["variants"].push_back(vj);
  }
  return j;
}

inline void write_report(const EvaluationReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "report.json");
    if (!os) throw std::runtime_error("cannot write report.json");
    os << report_json(r).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "report.csv");
    os << "variant,voting,fold,accuracy\n";
    for (const auto& v : r.variants) {
      for (const auto& f : v.folds) {
        os << v.variant << ",majority," << f.fold << "," << f.majority_accuracy << "\n";
        os << v.variant << ",probability," << f.fold << "," << f.probability_accuracy
           << "\n";
      }
      os << v.variant << ",majority,mean," << v.mean(true) << "\n";
      os << v.variant << ",probability,mean," << v.mean(false) << "\n";
    }
  }
}

inline void write_confusion_csv(const std::vector<std::vector<std::size_t>>& confusion,
                                const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const auto& row : confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ",";
      os << row[c];
    }
    os << "\n";
  }
}

}  // namespace mstnet::exp
