#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mstnet::feat {

// Per-clip-variant feature cache: a float32 little-endian row-major matrix
// (log-mel bands x frames, or 1 x samples for raw waveforms) plus the segment
// start index. Bit-exact across runs for identical inputs.
struct CacheFile {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;                 // rows * cols
  std::vector<std::uint32_t> segment_starts;

  static constexpr char kMagic[4] = {'M', 'S', 'T', 'F'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::uint32_t kDtypeF32LE = 1;
};

namespace cache_detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  os.write(b, 4);
}
inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

}  // namespace cache_detail

inline void write_cache(const CacheFile& c, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write cache " + path.string());
  os.write(CacheFile::kMagic, 4);
  cache_detail::put_u32(os, CacheFile::kVersion);
  cache_detail::put_u32(os, CacheFile::kDtypeF32LE);
  cache_detail::put_u32(os, c.rows);
  cache_detail::put_u32(os, c.cols);
  cache_detail::put_u32(os, std::uint32_t(c.segment_starts.size()));
  static_assert(sizeof(float) == 4);
  os.write(reinterpret_cast<const char*>(c.data.data()),
           std::streamsize(c.data.size() * sizeof(float)));
  for (auto s : c.segment_starts) cache_detail::put_u32(os, s);
}

inline CacheFile read_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read cache " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, CacheFile::kMagic, 4) != 0)
    throw std::runtime_error("not a feature cache: " + path.string());
  if (cache_detail::get_u32(is) != CacheFile::kVersion)
    throw std::runtime_error("unsupported cache version: " + path.string());
  if (cache_detail::get_u32(is) != CacheFile::kDtypeF32LE)
    throw std::runtime_error("unsupported cache dtype: " + path.string());
  CacheFile c;
  c.rows = cache_detail::get_u32(is);
  c.cols = cache_detail::get_u32(is);
  const auto n_segs = cache_detail::get_u32(is);
  c.data.resize(std::size_t(c.rows) * c.cols);
  is.read(reinterpret_cast<char*>(c.data.data()),
          std::streamsize(c.data.size() * sizeof(float)));
  c.segment_starts.resize(n_segs);
  for (auto& s : c.segment_starts) s = cache_detail::get_u32(is);
  if (!is) throw std::runtime_error("truncated cache: " + path.string());
  return c;
}

}  // namespace mstnet::feat
