#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mstnet::feat {

// Trainset-wide statistics used to map log-mel values into [-1, 1]:
// standardize by mean/std, then rescale by the standardized extrema.
struct NormStats {
  double mean = 0.0;
  double stddev = 1.0;
  double min = 0.0;  // raw trainset extrema (pre-standardization)
  double max = 0.0;

  double z_min() const { return (min - mean) / stddev; }
  double z_max() const { return (max - mean) / stddev; }
};

class StatsAccumulator {
 public:
  void add(const std::vector<double>& values) {
    for (double v : values) {
      sum_ += v;
      sumsq_ += v * v;
      min_ = std::min(min_, v);
      max_ = std::max(max_, v);
      ++count_;
    }
  }

  NormStats finish() const {
    if (count_ == 0) throw std::invalid_argument("norm stats: empty trainset");
    NormStats s;
    s.mean = sum_ / double(count_);
    const double var = std::max(0.0, sumsq_ / double(count_) - s.mean * s.mean);
    s.stddev = std::sqrt(var);
    if (s.stddev <= 0.0) throw std::invalid_argument("norm stats: zero std, degenerate data");
    s.min = min_;
    s.max = max_;
    if (!(s.max > s.min)) throw std::invalid_argument("norm stats: max <= min");
    return s;
  }

 private:
  double sum_ = 0.0, sumsq_ = 0.0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  std::size_t count_ = 0;
};

// Trainset members land in [-1, 1] by construction; held-out values are
// clamped when `clamp` is set.
inline double apply_norm_scalar(double x, const NormStats& s, bool clamp) {
  const double z = (x - s.mean) / s.stddev;
  double r = 2.0 * (z - s.z_min()) / (s.z_max() - s.z_min()) - 1.0;
  if (clamp) r = std::clamp(r, -1.0, 1.0);
  return r;
}

inline void apply_norm(std::vector<double>& values, const NormStats& s, bool clamp) {
  for (double& v : values) v = apply_norm_scalar(v, s, clamp);
}

}  // namespace mstnet::feat
