#pragma once

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mstnet::exp {

namespace png_detail {

inline void put_u32be(std::string& out, std::uint32_t v) {
  out.push_back(char((v >> 24) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char(v & 0xff));
}

inline void put_chunk(std::ostream& os, const char type[4], const std::string& body) {
  std::string buf;
  put_u32be(buf, std::uint32_t(body.size()));
  buf.append(type, 4);
  buf += body;
  const auto crc = ::crc32(0, reinterpret_cast<const Bytef*>(buf.data() + 4),
                           uInt(buf.size() - 4));
  put_u32be(buf, std::uint32_t(crc));
  os.write(buf.data(), std::streamsize(buf.size()));
}

}  // namespace png_detail

// Minimal 8-bit grayscale PNG writer (zlib-deflated, no interlace). pixels is
// row-major, height x width.
inline void write_png_gray(const std::filesystem::path& path, std::size_t width,
                           std::size_t height, const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != width * height)
    throw std::invalid_argument("write_png_gray: pixel count mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());

  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  os.write(reinterpret_cast<const char*>(sig), 8);

  std::string ihdr;
  png_detail::put_u32be(ihdr, std::uint32_t(width));
  png_detail::put_u32be(ihdr, std::uint32_t(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // color type: grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  png_detail::put_chunk(os, "IHDR", ihdr);

  // raw scanlines, each prefixed by filter byte 0
  std::vector<std::uint8_t> raw((width + 1) * height);
  for (std::size_t y = 0; y < height; ++y) {
    raw[y * (width + 1)] = 0;
    for (std::size_t x = 0; x < width; ++x)
      raw[y * (width + 1) + 1 + x] = pixels[y * width + x];
  }
  uLongf bound = compressBound(uLong(raw.size()));
  std::string idat(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(idat.data()), &bound, raw.data(),
                uLong(raw.size()), 9) != Z_OK)
    throw std::runtime_error("png deflate failed");
  idat.resize(bound);
  png_detail::put_chunk(os, "IDAT", idat);
  png_detail::put_chunk(os, "IEND", "");
}

}  // namespace mstnet::exp
