#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mstnet::exp {

// Full experiment configuration. Defaults are the published training recipe;
// anything set in a config file is tracked as an override so reports can list
// deviations explicitly.
struct ExperimentConfig {
  // dataset
  std::string dataset_path;          // falls back to $MELSEED_DATA
  std::string artifacts_dir = "artifacts";
  double sample_rate = 22050.0;
  double clip_seconds = 5.0;

  // stft / mel
  std::size_t window = 1024;
  std::size_t hop = 512;
  std::size_t n_mels = 60;

  // segmentation
  std::size_t segment_frames = 101;
  double overlap = 0.5;
  double silence_threshold = 1e-3;

  // augmentation
  double stretch_low = 0.8;
  double stretch_high = 1.2;
  double pitch_semitones = 2.0;
  bool augment_mst = false;  // MST trains on unaugmented segments by default

  // mst training
  double mst_lr = 3e-4;
  std::size_t mst_batch = 100;
  std::size_t mst_max_epochs = 500;
  std::size_t mst_patience = 20;

  // classifier training
  double clf_lr = 5e-3;
  double clf_momentum = 0.9;
  std::size_t clf_batch = 500;
  std::size_t clf_epochs = 200;
  double dropout_keep = 0.5;

  // run
  std::uint64_t seed = 1;
  std::vector<int> folds = {1, 2, 3, 4, 5};
  std::vector<std::string> variants = {"mel_baseline", "raw_xavier",
                                       "raw_pretrained_frozen"};
  bool smoke = false;
  std::size_t smoke_classes = 2;
  std::size_t smoke_clips_per_class = 10;

  std::map<std::string, std::string> overrides;  // keys set by the config file

  std::size_t clip_samples() const {
    return std::size_t(clip_seconds * sample_rate + 0.5);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

inline std::vector<std::string> parse_str_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: not a boolean: " + s);
}

}  // namespace detail

// Apply one namespaced key. Throws on unknown keys so typos fail loudly.
inline void apply_config_key(ExperimentConfig& c, const std::string& key,
                             const std::string& value) {
  using detail::parse_bool;
  if (key == "dataset.path") c.dataset_path = value;
  else if (key == "dataset.artifacts") c.artifacts_dir = value;
  else if (key == "dataset.sample_rate") c.sample_rate = std::stod(value);
  else if (key == "dataset.clip_seconds") c.clip_seconds = std::stod(value);
  else if (key == "stft.window") c.window = std::stoul(value);
  else if (key == "stft.hop") c.hop = std::stoul(value);
  else if (key == "stft.n_mels") c.n_mels = std::stoul(value);
  else if (key == "segment.frames") c.segment_frames = std::stoul(value);
  else if (key == "segment.overlap") c.overlap = std::stod(value);
  else if (key == "segment.silence_threshold") c.silence_threshold = std::stod(value);
  else if (key == "augment.stretch_low") c.stretch_low = std::stod(value);
  else if (key == "augment.stretch_high") c.stretch_high = std::stod(value);
  else if (key == "augment.pitch_semitones") c.pitch_semitones = std::stod(value);
  else if (key == "augment.mst") c.augment_mst = parse_bool(value);
  else if (key == "mst.lr") c.mst_lr = std::stod(value);
  else if (key == "mst.batch") c.mst_batch = std::stoul(value);
  else if (key == "mst.max_epochs") c.mst_max_epochs = std::stoul(value);
  else if (key == "mst.patience") c.mst_patience = std::stoul(value);
  else if (key == "clf.lr") c.clf_lr = std::stod(value);
  else if (key == "clf.momentum") c.clf_momentum = std::stod(value);
  else if (key == "clf.batch") c.clf_batch = std::stoul(value);
  else if (key == "clf.epochs") c.clf_epochs = std::stoul(value);
  else if (key == "clf.dropout_keep") c.dropout_keep = std::stod(value);
  else if (key == "run.seed") c.seed = std::stoull(value);
  else if (key == "run.folds") c.folds = detail::parse_int_list(value);
  else if (key == "run.variants") c.variants = detail::parse_str_list(value);
  else if (key == "run.smoke") c.smoke = parse_bool(value);
  else if (key == "run.smoke_classes") c.smoke_classes = std::stoul(value);
  else if (key == "run.smoke_clips_per_class") c.smoke_clips_per_class = std::stoul(value);
  else throw std::invalid_argument("config: unknown key: " + key);
  c.overrides[key] = value;
}

// INI-style config: `key = value` lines, `#`/`;` comments, optional
// `[section]` headers that prefix subsequent keys (`[mst]` + `lr` -> `mst.lr`).
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path.string());
  ExperimentConfig c;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!section.empty() && key.find('.') == std::string::npos)
      key = section + "." + key;
    apply_config_key(c, key, value);
  }
  if (c.dataset_path.empty()) {
    if (const char* env = std::getenv("MELSEED_DATA")) c.dataset_path = env;
  }
  return c;
}

// Desk-scale preset: tiny synthetic dataset and trimmed training budgets so
// the full pipeline finishes in minutes.
inline void apply_smoke_preset(ExperimentConfig& c) {
  c.smoke = true;
  c.mst_max_epochs = 30;
  c.mst_patience = 30;
  c.clf_epochs = 5;
  c.clf_batch = 50;
  c.mst_batch = 20;
  if (c.folds.size() > 2) c.folds = {1};
}

inline int validate_fold(int f) {
  if (f < 1 || f > 5) throw std::invalid_argument("fold must be in 1..5");
  return f;
}

}  // namespace mstnet::exp
