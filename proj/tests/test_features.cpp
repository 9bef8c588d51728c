#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "mstnet/feat/augment.hpp"
#include "mstnet/feat/cache.hpp"
#include "mstnet/feat/melspec.hpp"
#include "mstnet/feat/normalize.hpp"
#include "mstnet/feat/segment.hpp"

using namespace mstnet;

namespace {

std::vector<double> tone(double freq, double sr, std::size_t n, double amp = 0.8) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * M_PI * freq * double(i) / sr);
  return x;
}

std::vector<double> noisy_clip(std::size_t n, unsigned seed, double amp = 0.5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

}  // namespace

TEST_CASE("norm stats map trainset extrema to the interval endpoints") {
  feat::StatsAccumulator acc;
  acc.add({-3.0, -1.0, 0.5, 2.0, 7.0});
  auto s = acc.finish();
  REQUIRE(feat::apply_norm_scalar(-3.0, s, false) == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(feat::apply_norm_scalar(7.0, s, false) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("constant trainset is a degenerate-data error") {
  feat::StatsAccumulator acc;
  acc.add({2.0, 2.0, 2.0});
  REQUIRE_THROWS(acc.finish());
  feat::StatsAccumulator empty;
  REQUIRE_THROWS(empty.finish());
}

TEST_CASE("held-out value follows the standardize-then-rescale formula") {
  feat::StatsAccumulator acc;
  std::vector<double> train = {-1.0, 0.0, 1.0, 4.0};
  acc.add(train);
  auto s = acc.finish();
  // scalar hand computation
  const double mean = 1.0;
  const double sd = std::sqrt((4.0 + 1.0 + 0.0 + 9.0) / 4.0);
  const double z = (2.5 - mean) / sd;
  const double z_min = (-1.0 - mean) / sd, z_max = (4.0 - mean) / sd;
  const double expect = 2.0 * (z - z_min) / (z_max - z_min) - 1.0;
  REQUIRE(feat::apply_norm_scalar(2.5, s, true) == Catch::Approx(expect).margin(1e-12));

  // values beyond the trainset range clamp to [-1, 1]
  REQUIRE(feat::apply_norm_scalar(100.0, s, true) == 1.0);
  REQUIRE(feat::apply_norm_scalar(-100.0, s, true) == -1.0);
  REQUIRE(feat::apply_norm_scalar(100.0, s, false) > 1.0);
}

TEST_CASE("a 5-second clip yields 3 segments at stride 50") {
  auto x = noisy_clip(110250, 3);
  auto segs = feat::segment_clip(x, {}, {}, feat::SegmentKind::Regression);
  REQUIRE(segs.size() == 3);
  REQUIRE(segs[0].start_frame == 0);
  REQUIRE(segs[1].start_frame == 50);
  REQUIRE(segs[2].start_frame == 100);
  for (const auto& s : segs) {
    REQUIRE(s.raw.size() == 51200);
    REQUIRE(s.target_mel.n_mels == 60);
    REQUIRE(s.target_mel.n_frames == 100);
  }
  // consecutive segments share 51 frames
  REQUIRE(segs[1].start_frame - segs[0].start_frame == 50);
}

TEST_CASE("classification segments carry 101-frame mel inputs") {
  auto x = noisy_clip(110250, 4);
  auto segs = feat::segment_clip(x, {}, {}, feat::SegmentKind::Classification);
  REQUIRE(segs.size() == 3);
  for (const auto& s : segs) {
    REQUIRE(s.raw.size() == 51712);
    REQUIRE(s.input_mel.n_frames == 101);
    REQUIRE(s.target_mel.values.empty());
  }
}

TEST_CASE("silent clip yields no segments") {
  std::vector<double> x(110250, 0.0);
  auto segs = feat::segment_clip(x, {}, {}, feat::SegmentKind::Regression);
  REQUIRE(segs.empty());

  // evaluation fallback keeps the loudest slice: only the last window
  // (samples 51200..102911) covers the spike at 90000
  for (std::size_t i = 0; i < 100; ++i) x[90000 + i] = 5e-4;
  auto kept = feat::segment_clip(x, {}, {}, feat::SegmentKind::Classification, true);
  REQUIRE(kept.size() == 1);
  REQUIRE(kept[0].start_frame == 100);
  REQUIRE(kept[0].peak == Catch::Approx(5e-4));
}

TEST_CASE("segment raw slices are peak-normalized") {
  auto x = noisy_clip(110250, 5, 0.25);
  auto segs = feat::segment_clip(x, {}, {}, feat::SegmentKind::Regression);
  for (const auto& s : segs) {
    double mx = 0.0;
    for (double v : s.raw) mx = std::max(mx, std::abs(v));
    REQUIRE(mx == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(s.peak > 0.0);
    REQUIRE(s.peak < 0.26);
  }
}

TEST_CASE("segment target equals the mel pipeline on the unnormalized slice") {
  auto x = noisy_clip(110250, 6);
  auto segs = feat::segment_clip(x, {}, {}, feat::SegmentKind::Regression);
  REQUIRE_FALSE(segs.empty());
  const auto& s = segs[1];
  // undo the per-segment normalization, recompute, compare columns 0..99
  std::vector<double> raw(s.raw);
  for (double& v : raw) v *= s.peak;
  auto mel = feat::compute_log_mel(raw);
  REQUIRE(mel.n_frames == 101);
  for (std::size_t m = 0; m < 60; ++m)
    for (std::size_t t = 0; t < 100; ++t)
      REQUIRE(s.target_mel.at(m, t) == Catch::Approx(mel.at(m, t)).margin(1e-9));
}

TEST_CASE("time stretch with unit rate is the identity") {
  auto x = noisy_clip(22050, 7);
  auto y = feat::time_stretch(x, 1.0);
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(y[i] == Catch::Approx(x[i]).margin(1e-6));
}

TEST_CASE("time stretch length arithmetic") {
  std::vector<double> x(110250, 0.1);
  REQUIRE(feat::time_stretch(x, 0.8).size() == 137812);
  REQUIRE(feat::time_stretch(x, 1.2).size() == 91875);
}

TEST_CASE("pitch shift of a 440 Hz tone by +12 semitones peaks at 880 Hz") {
  const double sr = 22050.0;
  auto x = tone(440.0, sr, 44100);
  auto y = feat::pitch_shift(x, 12.0);
  REQUIRE(y.size() == x.size());

  std::size_t n_bins = 0, n_frames = 0;
  auto mag = dsp::stft_magnitude(y, {1024, 512}, n_bins, n_frames);
  // average the interior frames, then peak-pick
  std::vector<double> avg(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b)
    for (std::size_t t = 5; t + 5 < n_frames; ++t) avg[b] += mag[b * n_frames + t];
  std::size_t argmax = 0;
  for (std::size_t b = 1; b < n_bins; ++b)
    if (avg[b] > avg[argmax]) argmax = b;
  const double peak_hz = double(argmax) * sr / 1024.0;
  REQUIRE(std::abs(peak_hz - 880.0) <= sr / 1024.0);
}

TEST_CASE("augment produces 4 variants with distinct tags and fixed length") {
  audio::AudioClip clip;
  clip.sample_rate = 22050;
  clip.clip_id = "1-1-A-0";
  clip.samples = tone(500.0, 22050.0, 110250);
  auto vars = feat::augment(clip);
  REQUIRE(vars.size() == 4);
  std::set<std::string> ids;
  for (const auto& v : vars) {
    REQUIRE(v.samples.size() == clip.samples.size());
    REQUIRE(ids.insert(v.clip_id).second);
    REQUIRE(v.clip_id.find(clip.clip_id) == 0);
  }
}

TEST_CASE("feature cache round trips bit-exactly") {
  feat::CacheFile c;
  c.rows = 60;
  c.cols = 216;
  c.data.resize(60 * 216);
  std::mt19937 rng(8);
  for (auto& v : c.data) v = float(rng()) / 1e9f;
  c.segment_starts = {0, 50, 100};

  const auto path = std::filesystem::temp_directory_path() / "mstnet_cache_test.bin";
  feat::write_cache(c, path);
  auto back = feat::read_cache(path);
  REQUIRE(back.rows == c.rows);
  REQUIRE(back.cols == c.cols);
  REQUIRE(back.segment_starts == c.segment_starts);
  for (std::size_t i = 0; i < c.data.size(); ++i) REQUIRE(back.data[i] == c.data[i]);

  // write twice -> identical bytes
  const auto path2 = std::filesystem::temp_directory_path() / "mstnet_cache_test2.bin";
  feat::write_cache(c, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  REQUIRE(sa == sb);
}
