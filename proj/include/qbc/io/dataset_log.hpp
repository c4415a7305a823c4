// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dataset log: one JSON object per line, one line per instance.
//
//   {"id":0,"epoch":0,"x":[...],"x_physical":[...],"y":[...],
//    "uncertainty":0.0,"block":3,"mode":"seed","explore_epoch":false}
//
// Reals use the shortest representation that reads back to the same double.

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qbc/orchestrator/dataset.hpp"

namespace qbc::io {

std::string instance_to_json(const orchestrator::Instance& instance);
/// FormatError naming the missing or mistyped field.
orchestrator::Instance instance_from_json(const std::string& line);

struct DatasetReadResult {
  std::vector<orchestrator::Instance> instances;
  std::vector<std::string> warnings;
};

/// A last line without a terminating newline that does not parse is dropped
/// with a warning (a writer killed mid-line). Any other malformed line, or
/// ids that do not strictly increase, throw FormatError with the line number.
DatasetReadResult read_dataset(const std::filesystem::path& path);

/// Writes the whole dataset, replacing the file.
void write_dataset(const std::filesystem::path& path,
                   std::span<const orchestrator::Instance> instances);

/// Append-only writer; every append is flushed.
class DatasetWriter {
 public:
  /// Truncates an existing file.
  explicit DatasetWriter(const std::filesystem::path& path);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void append(std::span<const orchestrator::Instance> instances);

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  bool any_ = false;
  std::size_t last_id_ = 0;
};

}  // namespace qbc::io
