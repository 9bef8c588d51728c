#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "mstnet/audio/folds.hpp"
#include "mstnet/audio/resample.hpp"
#include "mstnet/audio/wav.hpp"

using namespace mstnet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / "mstnet_audio_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("esc filename parsing") {
  int fold = 0, cls = 0;
  REQUIRE(audio::parse_esc_filename("1-100032-A-0", fold, cls));
  REQUIRE(fold == 1);
  REQUIRE(cls == 0);
  REQUIRE(audio::parse_esc_filename("5-9-B-49", fold, cls));
  REQUIRE(fold == 5);
  REQUIRE(cls == 49);
  REQUIRE_FALSE(audio::parse_esc_filename("clip42", fold, cls));
  REQUIRE_FALSE(audio::parse_esc_filename("a-b-c-d", fold, cls));
}

TEST_CASE("pcm16 round trip within 1 LSB") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-0.9, 0.9);
  std::vector<double> x(2000);
  for (auto& v : x) v = d(rng);
  const auto path = temp_dir() / "1-7-A-3.wav";
  audio::write_wav_pcm16(path, x, 44100);
  auto clip = audio::decode_wav(path);
  REQUIRE(clip.sample_rate == 44100);
  REQUIRE(clip.samples.size() == x.size());
  REQUIRE(clip.fold == 1);
  REQUIRE(clip.class_label == 3);
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(std::abs(clip.samples[i] - x[i]) < 1.0 / 32768.0);
}

TEST_CASE("full-scale pcm16 maps to 32767/32768") {
  std::vector<double> x = {1.0, -1.0, 0.0};
  const auto path = temp_dir() / "2-1-A-4.wav";
  audio::write_wav_pcm16(path, x, 44100);
  auto clip = audio::decode_wav(path);
  REQUIRE(clip.samples[0] == Catch::Approx(32767.0 / 32768.0));
  REQUIRE(clip.samples[1] == Catch::Approx(-1.0));
  REQUIRE(clip.samples[2] == 0.0);
}

TEST_CASE("all-zero clip of one second") {
  std::vector<double> x(44100, 0.0);
  const auto path = temp_dir() / "3-1-A-7.wav";
  audio::write_wav_pcm16(path, x, 44100);
  auto clip = audio::decode_wav(path);
  REQUIRE(clip.samples.size() == 44100);
  for (double v : clip.samples) REQUIRE(v == 0.0);
}

TEST_CASE("decode errors") {
  const auto bad = temp_dir() / "garbage.wav";
  {
    std::ofstream f(bad, std::ios::binary);
    f << "NOTARIFFFILEATALL";
  }
  REQUIRE_THROWS_AS(audio::decode_wav(bad), audio::WavDecodeError);

  const auto noname = temp_dir() / "notesc.wav";
  audio::write_wav_pcm16(noname, std::vector<double>(100, 0.0), 44100);
  REQUIRE_THROWS_AS(audio::decode_wav(noname), audio::MetadataError);
  REQUIRE_NOTHROW(audio::decode_wav(noname, /*parse_name=*/false));
}

TEST_CASE("resample halves the length 2:1") {
  audio::AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.assign(220500, 0.0);
  auto out = audio::resample(clip, 22050);
  REQUIRE(out.sample_rate == 22050);
  REQUIRE(out.samples.size() == 110250);
}

TEST_CASE("resample preserves DC") {
  std::vector<double> x(44100, 0.5);
  auto y = audio::resample_signal(x, 44100, 22050);
  for (std::size_t i = 200; i + 200 < y.size(); ++i)
    REQUIRE(y[i] == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("resampled sine matches analytic evaluation") {
  const double freq = 1000.0;
  std::vector<double> x(44100);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * M_PI * freq * double(i) / 44100.0);
  auto y = audio::resample_signal(x, 44100, 22050);
  for (std::size_t i = 200; i + 200 < y.size(); ++i) {
    const double expect = std::sin(2.0 * M_PI * freq * double(i) / 22050.0);
    REQUIRE(std::abs(y[i] - expect) < 1e-3);
  }
}

TEST_CASE("aliasing from a tone above the target Nyquist is below -60 dB") {
  const double freq = 15000.0;  // above 11025, must be rejected when downsampling
  std::vector<double> x(44100);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * M_PI * freq * double(i) / 44100.0);
  auto y = audio::resample_signal(x, 44100, 22050);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 200; i + 200 < y.size(); ++i) acc += y[i] * y[i], ++n;
  const double rms = std::sqrt(acc / double(n));
  REQUIRE(rms < std::sqrt(0.5) * 1e-3);  // -60 dB vs the input tone
}

TEST_CASE("resample is linear") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> x(4000), y(4000), z(4000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = d(rng);
    y[i] = d(rng);
    z[i] = 0.3 * x[i] - 1.7 * y[i];
  }
  auto rx = audio::resample_signal(x, 44100, 22050);
  auto ry = audio::resample_signal(y, 44100, 22050);
  auto rz = audio::resample_signal(z, 44100, 22050);
  for (std::size_t i = 0; i < rz.size(); ++i)
    REQUIRE(rz[i] == Catch::Approx(0.3 * rx[i] - 1.7 * ry[i]).margin(1e-9));
}

TEST_CASE("fold assignment partitions the clip set") {
  std::vector<audio::AudioClip> clips;
  for (int f = 1; f <= 5; ++f)
    for (int i = 0; i < 4; ++i) {
      audio::AudioClip c;
      c.fold = f;
      c.clip_id = std::to_string(f) + "-" + std::to_string(i);
      clips.push_back(c);
    }
  auto split = audio::assign_folds(clips, 5, 4);
  REQUIRE(split.train.size() == 12);
  REQUIRE(split.validation.size() == 4);
  REQUIRE(split.test.size() == 4);
  std::set<std::string> seen;
  for (const auto* part : {&split.train, &split.validation, &split.test})
    for (const auto& c : *part) REQUIRE(seen.insert(c.clip_id).second);
  REQUIRE(seen.size() == clips.size());
}

TEST_CASE("fold assignment edge cases") {
  REQUIRE_THROWS(audio::assign_folds({}, 3, 3));  // test == validation
  auto empty = audio::assign_folds({}, 5, 4);
  REQUIRE(empty.train.empty());
  REQUIRE(empty.validation.empty());
  REQUIRE(empty.test.empty());

  std::vector<audio::AudioClip> clips(6);
  for (auto& c : clips) c.fold = 3;
  auto split = audio::assign_folds(clips, 3, 4);
  REQUIRE(split.train.empty());
  REQUIRE(split.validation.empty());
  REQUIRE(split.test.size() == 6);
}
