// SPDX-License-Identifier: Apache-2.0
#include "qbc/nn/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "qbc/bytes.hpp"
#include "qbc/errors.hpp"

namespace qbc::nn {
namespace {

constexpr std::string_view kMagic{"QBCCKPT\0", 8};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxRank = 8;

void write_array(ByteWriter& w, const Array& a) {
  w.u32(static_cast<std::uint32_t>(a.rank()));
  for (auto e : a.shape()) w.u64(e);
  for (double v : a.values()) w.f64(v);
}

Array read_array(ByteReader& r) {
  const std::uint32_t rank = r.u32();
  if (rank > kMaxRank)
    throw FormatError("checkpoint: implausible array rank " +
                      std::to_string(rank));
  Shape shape(rank);
  for (auto& e : shape) e = r.u64();
  const std::size_t n = shape_volume(shape);
  if (n > r.remaining() / 8)
    throw FormatError("checkpoint: array " + shape_to_string(shape) +
                      " exceeds remaining data");
  std::vector<double> data(n);
  for (auto& v : data) v = r.f64();
  return Array(std::move(shape), std::move(data));
}

}  // namespace

std::string encode_checkpoint(const NetworkConfig& config,
                              const ModelState& state) {
  if (state.m.size() != state.params.size() ||
      state.v.size() != state.params.size())
    throw DimensionError("checkpoint: moment arrays do not match parameters");
  ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.str(config.preset);
  w.u64(config.input_dim);
  w.u32(static_cast<std::uint32_t>(config.dense_sizes.size()));
  for (auto s : config.dense_sizes) w.u64(s);
  w.u64(config.initial_channels);
  w.u64(config.initial_length);
  w.u32(static_cast<std::uint32_t>(config.resconv.size()));
  for (const auto& m : config.resconv) {
    w.u64(m.kernel);
    w.u64(m.stride);
    w.u64(m.padding);
    w.u64(m.out_channels);
    w.u32(m.output == Activation::relu ? 1u : 0u);
  }
  w.u64(config.attention_in_channels);
  w.u64(state.step);
  w.u32(static_cast<std::uint32_t>(state.params.size()));
  for (const auto& a : state.params) write_array(w, a);
  for (const auto& a : state.m) write_array(w, a);
  for (const auto& a : state.v) write_array(w, a);
  return std::move(w).bytes();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.raw(kMagic.size()) != kMagic)
    throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(version));
  Checkpoint ck;
  NetworkConfig& c = ck.config;
  c.preset = r.str();
  c.input_dim = r.u64();
  c.dense_sizes.resize(r.u32());
  for (auto& s : c.dense_sizes) s = r.u64();
  c.initial_channels = r.u64();
  c.initial_length = r.u64();
  c.resconv.resize(r.u32());
  for (auto& m : c.resconv) {
    m.kernel = r.u64();
    m.stride = r.u64();
    m.padding = r.u64();
    m.out_channels = r.u64();
    const std::uint32_t act = r.u32();
    if (act > 1) throw FormatError("checkpoint: bad ResConv activation flag");
    m.output = act == 1 ? Activation::relu : Activation::linear;
  }
  c.attention_in_channels = r.u64();
  ck.state.step = r.u64();
  const std::uint32_t count = r.u32();
  for (auto* group : {&ck.state.params, &ck.state.m, &ck.state.v}) {
    group->reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) group->push_back(read_array(r));
  }
  if (!r.done())
    throw FormatError("checkpoint: " + std::to_string(r.remaining()) +
                      " trailing bytes");
  for (std::uint32_t i = 0; i < count; ++i)
    if (ck.state.m[i].shape() != ck.state.params[i].shape() ||
        ck.state.v[i].shape() != ck.state.params[i].shape())
      throw FormatError("checkpoint: moment shapes do not match parameter " +
                        std::to_string(i));
  Network(c).check_state(ck.state);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path,
                     const NetworkConfig& config, const ModelState& state) {
  const std::string bytes = encode_checkpoint(config, state);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace qbc::nn
