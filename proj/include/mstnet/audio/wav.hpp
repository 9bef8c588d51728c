#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mstnet::audio {

struct AudioClip {
  std::vector<double> samples;  // mono, in [-1, 1]
  int sample_rate = 0;
  std::string clip_id;
  int class_label = -1;
  int fold = -1;
};

struct WavDecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MetadataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t rd_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
inline std::uint16_t rd_u16(const std::uint8_t* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

}  // namespace detail

// ESC-50 style file names: {fold}-{source}-{take}-{class}.wav
// Returns false when the stem does not match the convention.
inline bool parse_esc_filename(const std::string& stem, int& fold, int& class_label) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : stem) {
    if (c == '-') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4) return false;
  auto is_num = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!is_num(parts[0]) || !is_num(parts[3])) return false;
  fold = std::stoi(parts[0]);
  class_label = std::stoi(parts[3]);
  return true;
}

// Decode a RIFF/WAVE file: PCM16 or IEEE float32, mono or stereo (averaged).
// Integer samples are scaled by 1/32768 so full-scale positive maps just
// below 1.0.
inline AudioClip decode_wav(const std::filesystem::path& path, bool parse_name = true) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw WavDecodeError("cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw WavDecodeError("malformed RIFF header: " + path.string());

  std::uint16_t fmt_code = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= buf.size()) {
    const char* id = reinterpret_cast<const char*>(buf.data() + off);
    const std::uint32_t sz = detail::rd_u32(buf.data() + off + 4);
    const std::size_t body = off + 8;
    if (body + sz > buf.size()) throw WavDecodeError("truncated chunk: " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (sz < 16) throw WavDecodeError("short fmt chunk: " + path.string());
      fmt_code = detail::rd_u16(buf.data() + body);
      channels = detail::rd_u16(buf.data() + body + 2);
      rate = detail::rd_u32(buf.data() + body + 4);
      bits = detail::rd_u16(buf.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = buf.data() + body;
      data_len = sz;
    }
    off = body + sz + (sz & 1);  // chunks are word-aligned
  }
  if (fmt_code == 0 || data == nullptr)
    throw WavDecodeError("missing fmt/data chunk: " + path.string());
  if (channels == 0 || rate == 0) throw WavDecodeError("bad fmt fields: " + path.string());

  const bool pcm16 = (fmt_code == 1 && bits == 16);
  const bool f32 = (fmt_code == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw UnsupportedFormatError("unsupported encoding (fmt=" + std::to_string(fmt_code) +
                                 ", bits=" + std::to_string(bits) + "): " + path.string());

  const std::size_t bytes_per = bits / 8;
  const std::size_t n_frames = data_len / (bytes_per * channels);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + (i * channels + c) * bytes_per;
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        acc += double(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += double(v);
      }
    }
    clip.samples[i] = acc / double(channels);
  }

  clip.clip_id = path.stem().string();
  if (parse_name) {
    if (!parse_esc_filename(clip.clip_id, clip.fold, clip.class_label))
      throw MetadataError("filename does not match {fold}-{source}-{take}-{class}.wav: " +
                          path.string());
    if (clip.fold < 1 || clip.fold > 5)
      throw MetadataError("fold out of range in " + path.string());
    if (clip.class_label < 0 || clip.class_label > 49)
      throw MetadataError("class out of range in " + path.string());
  }
  return clip;
}

// PCM16 writer, used for fixtures and the synthetic smoke dataset.
inline void write_wav_pcm16(const std::filesystem::path& path,
                            const std::vector<double>& samples, int sample_rate,
                            int channels = 1) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  auto w16 = [&](std::uint16_t v) { f.put(char(v & 0xff)).put(char(v >> 8)); };
  auto w32 = [&](std::uint32_t v) {
    f.put(char(v & 0xff)).put(char((v >> 8) & 0xff)).put(char((v >> 16) & 0xff)).put(char(v >> 24));
  };
  const std::uint32_t data_len = std::uint32_t(samples.size() * 2);
  f.write("RIFF", 4);
  w32(36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  w32(16);
  w16(1);
  w16(std::uint16_t(channels));
  w32(std::uint32_t(sample_rate));
  w32(std::uint32_t(sample_rate * channels * 2));
  w16(std::uint16_t(channels * 2));
  w16(16);
  f.write("data", 4);
  w32(data_len);
  for (double s : samples) {
    const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
    const std::int16_t v = std::int16_t(std::clamp<long>(q, -32768, 32767));
    w16(std::uint16_t(v));
  }
}

}  // namespace mstnet::audio
