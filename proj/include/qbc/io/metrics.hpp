// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qbc/orchestrator/learner.hpp"

namespace qbc::io {

inline constexpr const char* kMetricsHeader =
    "epoch,model,train_mse,val_mse,epsilon,explore,dataset_size,wall_s";

struct MetricsRow {
  std::size_t epoch = 0;
  std::size_t model = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double epsilon = 0.0;
  bool explore = false;
  std::size_t dataset_size = 0;
  double wall_s = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// One row per model of the epoch.
std::vector<MetricsRow> metrics_rows(const orchestrator::EpochRecord& epoch);

std::string render_metrics_row(const MetricsRow& row);

/// FormatError with the line number on a bad header or row.
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

/// Writes the header on construction and flushes every append.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void append(std::span<const MetricsRow> rows);

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

}  // namespace qbc::io
