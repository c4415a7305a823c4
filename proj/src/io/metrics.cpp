// SPDX-License-Identifier: Apache-2.0
#include "qbc/io/metrics.hpp"

#include <charconv>
#include <fstream>

#include "qbc/errors.hpp"

namespace qbc::io {

std::vector<MetricsRow> metrics_rows(const orchestrator::EpochRecord& e) {
  std::vector<MetricsRow> rows;
  for (std::size_t m = 0; m < e.models.size(); ++m)
    rows.push_back({e.epoch, m, e.models[m].train_mse, e.models[m].val_mse,
                    e.epsilon, e.exploration, e.dataset_size, e.wall_s});
  return rows;
}

std::string render_metrics_row(const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%d,%zu,%.3f",
                r.epoch, r.model, r.train_mse, r.val_mse, r.epsilon,
                r.explore ? 1 : 0, r.dataset_size, r.wall_s);
  return buf;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos
                                         ? std::string::npos
                                         : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T number(const std::string& s, const char* column) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw FormatError(std::string("column ") + column + ": bad value '" + s +
                      "'");
  return v;
}

}  // namespace

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read metrics '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw FormatError(path.string() + ":1: unexpected metrics header");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    try {
      if (f.size() != 8)
        throw FormatError("expected 8 columns, got " + std::to_string(f.size()));
      MetricsRow r;
      r.epoch = number<std::size_t>(f[0], "epoch");
      r.model = number<std::size_t>(f[1], "model");
      r.train_mse = number<double>(f[2], "train_mse");
      r.val_mse = number<double>(f[3], "val_mse");
      r.epsilon = number<double>(f[4], "epsilon");
      const int explore = number<int>(f[5], "explore");
      if (explore != 0 && explore != 1)
        throw FormatError("column explore: expected 0 or 1");
      r.explore = explore == 1;
      r.dataset_size = number<std::size_t>(f[6], "dataset_size");
      r.wall_s = number<double>(f[7], "wall_s");
      rows.push_back(r);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return rows;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path)
    : path_(path), file_(std::fopen(path.c_str(), "wb")) {
  if (!file_) throw FormatError("cannot write metrics '" + path.string() + "'");
  std::fprintf(file_, "%s\n", kMetricsHeader);
  std::fflush(file_);
}

MetricsWriter::~MetricsWriter() {
  if (file_) std::fclose(file_);
}

void MetricsWriter::append(std::span<const MetricsRow> rows) {
  for (const auto& r : rows)
    std::fprintf(file_, "%s\n", render_metrics_row(r).c_str());
  std::fflush(file_);
}

}  // namespace qbc::io
