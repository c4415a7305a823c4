// SPDX-License-Identifier: Apache-2.0
#pragma once

// INI-style run configuration:
//
//   # comment
//   [section]
//   key = value
//
// Every key is optional; missing keys keep their defaults. Unknown sections
// or keys, duplicates, type errors and constraint violations are rejected
// with a message naming the key, the line and the constraint.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qbc/orchestrator/config.hpp"

namespace qbc::io {

struct ConfigFile {
  orchestrator::RunConfig run;
  std::string outdir;  // [output] dir; empty selects the default location

  friend bool operator==(const ConfigFile&, const ConfigFile&) = default;
};

/// One documented key: section, name, default rendering and description.
struct ConfigKey {
  std::string section;
  std::string name;
  std::string default_value;
  std::string help;
};

/// All keys in rendering order.
std::vector<ConfigKey> config_keys();

/// `origin` prefixes error messages (usually the file name).
ConfigFile parse_config_text(std::string_view text,
                             const std::string& origin = "config");

ConfigFile parse_config(const std::filesystem::path& path);

/// Every key, with reals at round-trip precision, so that
/// parse_config_text(render_config(c)) == c.
std::string render_config(const ConfigFile& config);

}  // namespace qbc::io
