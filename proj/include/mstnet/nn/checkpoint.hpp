#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mstnet/nn/model.hpp"

namespace mstnet::nn {

// Model checkpoint: architecture descriptor (canonical text) plus named
// float32 little-endian tensors. Loading requires descriptor equality.
struct Checkpoint {
  std::string architecture;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  static constexpr char kMagic[4] = {'M', 'S', 'T', 'C'};
  static constexpr std::uint32_t kVersion = 1;
};

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  os.write(b, 4);
}
inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}
inline void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, std::uint32_t(s.size()));
  os.write(s.data(), std::streamsize(s.size()));
}
inline std::string read_str(std::istream& is) {
  const auto n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), std::streamsize(n));
  return s;
}

}  // namespace detail

template <typename T>
Checkpoint snapshot(Model<T>& model) {
  Checkpoint ck;
  ck.architecture = model.describe();
  for (const auto& p : model.params())
    ck.tensors.emplace_back(p.name, p.value->template cast<float>());
  return ck;
}

template <typename T>
void restore(Model<T>& model, const Checkpoint& ck) {
  if (model.describe() != ck.architecture)
    throw std::runtime_error("checkpoint: architecture descriptor mismatch");
  auto params = model.params();
  if (params.size() != ck.tensors.size())
    throw std::runtime_error("checkpoint: tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != ck.tensors[i].first ||
        params[i].value->shape() != ck.tensors[i].second.shape())
      throw std::runtime_error("checkpoint: tensor " + params[i].name + " mismatch");
    *params[i].value = ck.tensors[i].second.template cast<T>();
  }
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  os.write(Checkpoint::kMagic, 4);
  detail::write_u32(os, Checkpoint::kVersion);
  detail::write_str(os, ck.architecture);
  detail::write_u32(os, std::uint32_t(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    detail::write_str(os, name);
    detail::write_u32(os, std::uint32_t(t.rank()));
    for (std::size_t d = 0; d < t.rank(); ++d) detail::write_u32(os, std::uint32_t(t.dim(d)));
    static_assert(sizeof(float) == 4);
    os.write(reinterpret_cast<const char*>(t.data()),
             std::streamsize(t.numel() * sizeof(float)));
  }
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, Checkpoint::kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  if (detail::read_u32(is) != Checkpoint::kVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path.string());
  Checkpoint ck;
  ck.architecture = detail::read_str(is);
  const auto n = detail::read_u32(is);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto name = detail::read_str(is);
    const auto rank = detail::read_u32(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = detail::read_u32(is);
    Tensor<float> t(shape);
    is.read(reinterpret_cast<char*>(t.data()), std::streamsize(t.numel() * sizeof(float)));
    if (!is) throw std::runtime_error("truncated checkpoint: " + path.string());
    ck.tensors.emplace_back(name, std::move(t));
  }
  return ck;
}

}  // namespace mstnet::nn
