// SPDX-License-Identifier: Apache-2.0
#include "qbc/io/dataset_log.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qbc/errors.hpp"

namespace qbc::io {
namespace {

using nlohmann::json;
using orchestrator::Instance;

template <typename T>
T field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end())
    throw FormatError(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

std::string instance_to_json(const Instance& in) {
  json j = json::object();
  j["id"] = in.id;
  j["epoch"] = in.epoch;
  j["x"] = in.x;
  j["x_physical"] = in.x_physical;
  j["y"] = in.y;
  j["uncertainty"] = in.uncertainty;
  j["block"] = in.block;
  j["mode"] = orchestrator::to_string(in.mode);
  j["explore_epoch"] = in.explore_epoch;
  return j.dump();
}

Instance instance_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("record is not a JSON object");
  Instance in;
  in.id = field<std::size_t>(j, "id");
  in.epoch = field<std::size_t>(j, "epoch");
  in.x = field<std::vector<double>>(j, "x");
  in.x_physical = field<std::vector<double>>(j, "x_physical");
  in.y = field<std::vector<double>>(j, "y");
  in.uncertainty = field<double>(j, "uncertainty");
  in.block = field<std::size_t>(j, "block");
  in.mode = orchestrator::selection_mode_from_string(
      field<std::string>(j, "mode"));
  in.explore_epoch = field<bool>(j, "explore_epoch");
  if (in.x.size() != in.x_physical.size())
    throw FormatError("x and x_physical differ in length");
  return in;
}

DatasetReadResult read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read dataset log '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  DatasetReadResult out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const bool terminated = eol != std::string::npos;
    const std::string line =
        text.substr(pos, terminated ? eol - pos : std::string::npos);
    pos = terminated ? eol + 1 : text.size();
    ++line_no;
    if (line.empty()) continue;
    Instance rec;
    try {
      rec = instance_from_json(line);
    } catch (const FormatError& e) {
      if (!terminated) {
        out.warnings.push_back(path.string() + ":" + std::to_string(line_no) +
                               ": dropped truncated final record");
        break;
      }
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    if (!out.instances.empty() && rec.id <= out.instances.back().id)
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": id " + std::to_string(rec.id) +
                        " does not increase");
    out.instances.push_back(std::move(rec));
  }
  return out;
}

void write_dataset(const std::filesystem::path& path,
                   std::span<const Instance> instances) {
  DatasetWriter w(path);
  w.append(instances);
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path)
    : path_(path), file_(std::fopen(path.c_str(), "wb")) {
  if (!file_) throw FormatError("cannot write dataset log '" + path.string() + "'");
}

DatasetWriter::~DatasetWriter() {
  if (file_) std::fclose(file_);
}

void DatasetWriter::append(std::span<const Instance> instances) {
  for (const Instance& in : instances) {
    if (any_ && in.id <= last_id_)
      throw FormatError("dataset log ids must increase (" +
                        std::to_string(in.id) + " after " +
                        std::to_string(last_id_) + ")");
    const std::string line = instance_to_json(in) + "\n";
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size())
      throw FormatError("write failed on '" + path_.string() + "'");
    any_ = true;
    last_id_ = in.id;
  }
  std::fflush(file_);
}

}  // namespace qbc::io
