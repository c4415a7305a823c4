// SPDX-License-Identifier: Apache-2.0
#pragma once

// Append-only evaluation cache. File layout (little-endian):
//
//   "QBCCACHE" u32 version=1
//   records: u32 tag "REC1", u32 key length, key bytes, u32 L, f64 x L
//
// Keys are canonical 12-significant-digit renderings of the input vector.

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qbc::oracle {

/// "%.12g" of each value, single-space separated.
std::string cache_key(std::span<const double> values);

class EvalCache {
 public:
  /// In-memory only.
  EvalCache() = default;
  /// Loads `path` if it exists (CacheError when it is corrupt) and appends
  /// new records to it.
  explicit EvalCache(std::filesystem::path path);

  std::optional<std::vector<double>> lookup(const std::string& key) const;
  /// Stores and, for file-backed caches, appends and flushes the record.
  void insert(const std::string& key, const std::vector<double>& spectrum);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

}  // namespace qbc::oracle
