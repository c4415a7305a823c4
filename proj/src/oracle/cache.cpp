// SPDX-License-Identifier: Apache-2.0
#include "qbc/oracle/cache.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "qbc/bytes.hpp"
#include "qbc/errors.hpp"

namespace qbc::oracle {
namespace {

constexpr char kMagic[8] = {'Q', 'B', 'C', 'C', 'A', 'C', 'H', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kRecordTag = 0x31434552;  // "REC1"

}  // namespace

std::string cache_key(std::span<const double> values) {
  std::string key;
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", values[i]);
    if (i > 0) key += ' ';
    key += buf;
  }
  return key;
}

EvalCache::EvalCache(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) {
    if (path_.has_parent_path())
      std::filesystem::create_directories(path_.parent_path(), ec);
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw CacheError("cannot create cache file " + path_.string());
    ByteWriter w;
    w.raw(std::string_view(kMagic, sizeof kMagic));
    w.u32(kVersion);
    f.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!f) throw CacheError("cannot write cache file " + path_.string());
    return;
  }
  std::ifstream f(path_, std::ios::binary);
  if (!f) throw CacheError("cannot open cache file " + path_.string());
  const std::string data((std::istreambuf_iterator<char>(f)),
                         std::istreambuf_iterator<char>());
  ByteReader r(data);
  std::size_t record_start = 0;
  try {
    if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic))
      throw CacheError("not a cache file (bad magic)");
    if (r.u32() != kVersion) throw CacheError("unsupported cache version");
    while (!r.done()) {
      record_start = r.position();
      if (r.u32() != kRecordTag) throw CacheError("bad record tag");
      std::string key = r.str();
      const std::uint32_t len = r.u32();
      std::vector<double> y(len);
      for (auto& v : y) v = r.f64();
      entries_[std::move(key)] = std::move(y);
    }
  } catch (const FormatError& e) {
    throw CacheError("cache file " + path_.string() +
                     " is corrupt at byte " + std::to_string(record_start) +
                     ": " + e.what());
  } catch (const CacheError& e) {
    throw CacheError("cache file " + path_.string() +
                     " is corrupt at byte " + std::to_string(record_start) +
                     ": " + e.what());
  }
}

std::optional<std::vector<double>> EvalCache::lookup(
    const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EvalCache::insert(const std::string& key,
                       const std::vector<double>& spectrum) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) {
    ByteWriter w;
    w.u32(kRecordTag);
    w.str(key);
    w.u32(static_cast<std::uint32_t>(spectrum.size()));
    for (double v : spectrum) w.f64(v);
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    f.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    f.flush();
    if (!f) throw CacheError("cannot append to cache file " + path_.string());
  }
  entries_[key] = spectrum;
}

std::size_t EvalCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace qbc::oracle
