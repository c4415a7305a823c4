// SPDX-License-Identifier: Apache-2.0
#include "qbc/io/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qbc/errors.hpp"
#include "qbc/oracle/subprocess.hpp"

namespace qbc::io {
namespace {

using orchestrator::RunConfig;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string real(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t parse_count(const std::string& v, std::size_t min) {
  const std::uint64_t x = parse_u64(v);
  if (x < min)
    throw ConfigError("must be >= " + std::to_string(min) + ", got " + v);
  return static_cast<std::size_t>(x);
}

double parse_real(const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size() ||
      !std::isfinite(out))
    throw ConfigError("expected a finite real number, got '" + v + "'");
  return out;
}

/// Real in an interval; `lo_open`/`hi_open` select the bracket kinds.
double parse_real_in(const std::string& v, double lo, bool lo_open, double hi,
                     bool hi_open) {
  const double x = parse_real(v);
  const bool ok = (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  if (!ok) {
    std::string range = std::string(lo_open ? "(" : "[") + real(lo) + ", " +
                        (std::isinf(hi) ? "inf" : real(hi)) +
                        (hi_open ? ")" : "]");
    throw ConfigError("must lie in " + range + ", got " + v);
  }
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string render_ranges(const space::ParameterSpace& s) {
  std::string out;
  for (std::size_t i = 0; i < s.physical_ranges.size(); ++i) {
    if (i) out += ' ';
    out += real(s.physical_ranges[i].first) + ":" +
           real(s.physical_ranges[i].second);
  }
  return out;
}

space::ParameterSpace parse_ranges(const std::string& v) {
  space::ParameterSpace s;
  std::istringstream in(v);
  std::string word;
  while (in >> word) {
    const auto colon = word.find(':');
    if (colon == std::string::npos)
      throw ConfigError("expected lo:hi pairs separated by spaces, got '" +
                        word + "'");
    const double lo = parse_real(word.substr(0, colon));
    const double hi = parse_real(word.substr(colon + 1));
    if (!(lo < hi))
      throw ConfigError("range '" + word + "' must have lo < hi");
    s.physical_ranges.emplace_back(lo, hi);
  }
  s.n = s.physical_ranges.size();
  return s;
}

struct Field {
  const char* section;
  const char* name;
  const char* help;
  std::function<void(ConfigFile&, const std::string&)> set;
  std::function<std::string(const ConfigFile&)> get;
};

#define QBC_COUNT(sec, key, member, min, help)                              \
  Field {                                                                   \
    sec, key, help,                                                         \
        [](ConfigFile& c, const std::string& v) {                           \
          c.member = parse_count(v, min);                                   \
        },                                                                  \
        [](const ConfigFile& c) { return std::to_string(c.member); }        \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      QBC_COUNT("run", "epochs", run.epochs, 0, "algorithm epochs T"),
      QBC_COUNT("run", "ensemble_size", run.ensemble_size, 2,
                "committee size l (>= 2)"),
      QBC_COUNT("run", "init_size", run.init_size, 1,
                "Latin hypercube seed points"),
      QBC_COUNT("run", "init_train_steps", run.init_train_steps, 0,
                "optimizer steps on the seed set"),
      QBC_COUNT("run", "train_steps_per_epoch", run.train_steps_per_epoch, 0,
                "optimizer steps per training phase"),
      QBC_COUNT("run", "recent_window", run.recent_window, 1,
                "most recent instances trained every epoch (R >= k)"),
      QBC_COUNT("run", "full_train_period", run.full_train_period, 1,
                "full-dataset training every P epochs"),
      QBC_COUNT("run", "final_retrain_epochs", run.final_retrain_epochs, 0,
                "passes over the full dataset after the loop (F)"),
      QBC_COUNT("run", "validation_size", run.validation_size, 1,
                "uniform random validation points"),
      QBC_COUNT("run", "test_size", run.test_size, 1,
                "uniform random test points"),
      QBC_COUNT("run", "batch_size", run.batch_size, 1,
                "mini-batch size"),
      Field{"run", "seed", "master seed",
            [](ConfigFile& c, const std::string& v) {
              c.run.seed = parse_u64(v);
            },
            [](const ConfigFile& c) { return std::to_string(c.run.seed); }},
      QBC_COUNT("run", "threads", run.threads, 1,
                "worker threads for committee members"),
      Field{"run", "deterministic",
            "single-threaded, wall_s written as 0",
            [](ConfigFile& c, const std::string& v) {
              c.run.deterministic = parse_bool(v);
            },
            [](const ConfigFile& c) {
              return std::string(c.run.deterministic ? "true" : "false");
            }},
      QBC_COUNT("space", "partitions", run.partitions, 1,
                "blocks per axis p"),
      Field{"space", "gamma", "per-epoch uncertainty decay in (0, 1]",
            [](ConfigFile& c, const std::string& v) {
              c.run.gamma = parse_real_in(v, 0.0, true, 1.0, false);
            },
            [](const ConfigFile& c) { return real(c.run.gamma); }},
      Field{"space", "ranges",
            "physical lo:hi per axis, space separated; empty for unit ranges",
            [](ConfigFile& c, const std::string& v) {
              c.run.space = parse_ranges(v);
            },
            [](const ConfigFile& c) { return render_ranges(c.run.space); }},
      QBC_COUNT("acquisition", "blocks_per_epoch",
                run.acquisition.blocks_per_epoch, 1, "blocks per epoch B"),
      QBC_COUNT("acquisition", "candidates_per_block",
                run.acquisition.candidates_per_block, 1,
                "candidates per block m"),
      QBC_COUNT("acquisition", "additions_per_epoch",
                run.acquisition.additions_per_epoch, 1,
                "instances labelled per epoch k (<= B m)"),
      QBC_COUNT("acquisition", "exploration_period",
                run.acquisition.exploration_period, 1,
                "exploration epochs are t mod E == 0"),
      Field{"acquisition", "exploration_mode",
            "random-blocks or least-populated",
            [](ConfigFile& c, const std::string& v) {
              c.run.acquisition.exploration_mode =
                  acquisition::exploration_mode_from_string(v);
            },
            [](const ConfigFile& c) {
              return acquisition::to_string(c.run.acquisition.exploration_mode);
            }},
      Field{"acquisition", "epsilon_scope", "per-epoch or per-instance",
            [](ConfigFile& c, const std::string& v) {
              c.run.acquisition.epsilon_scope =
                  acquisition::epsilon_scope_from_string(v);
            },
            [](const ConfigFile& c) {
              return acquisition::to_string(c.run.acquisition.epsilon_scope);
            }},
      Field{"acquisition", "sample_variance",
            "divide by l - 1 instead of l",
            [](ConfigFile& c, const std::string& v) {
              c.run.acquisition.sample_variance = parse_bool(v);
            },
            [](const ConfigFile& c) {
              return std::string(c.run.acquisition.sample_variance ? "true"
                                                                   : "false");
            }},
      Field{"epsilon", "initial", "epsilon at t = 0, in [0, 1]",
            [](ConfigFile& c, const std::string& v) {
              c.run.epsilon.epsilon0 = parse_real_in(v, 0.0, false, 1.0, false);
            },
            [](const ConfigFile& c) { return real(c.run.epsilon.epsilon0); }},
      Field{"epsilon", "decay", "per-epoch factor in (0, 1]",
            [](ConfigFile& c, const std::string& v) {
              c.run.epsilon.decay_rate =
                  parse_real_in(v, 0.0, true, 1.0, false);
            },
            [](const ConfigFile& c) { return real(c.run.epsilon.decay_rate); }},
      Field{"epsilon", "floor", "lower bound in [0, initial]",
            [](ConfigFile& c, const std::string& v) {
              c.run.epsilon.floor = parse_real_in(v, 0.0, false, 1.0, false);
            },
            [](const ConfigFile& c) { return real(c.run.epsilon.floor); }},
      Field{"network", "preset", "desk-64 or paper-literal",
            [](ConfigFile& c, const std::string& v) {
              if (v != "desk-64" && v != "paper-literal")
                throw ConfigError("expected desk-64 or paper-literal, got '" +
                                  v + "'");
              c.run.preset = v;
            },
            [](const ConfigFile& c) { return c.run.preset; }},
      Field{"optimizer", "learning_rate", "Adam step size (> 0)",
            [](ConfigFile& c, const std::string& v) {
              c.run.optimizer.learning_rate = parse_real_in(
                  v, 0.0, true, INFINITY, false);
            },
            [](const ConfigFile& c) {
              return real(c.run.optimizer.learning_rate);
            }},
      Field{"optimizer", "beta1", "first-moment decay in (0, 1)",
            [](ConfigFile& c, const std::string& v) {
              c.run.optimizer.beta1 = parse_real_in(v, 0.0, true, 1.0, true);
            },
            [](const ConfigFile& c) { return real(c.run.optimizer.beta1); }},
      Field{"optimizer", "beta2", "second-moment decay in (0, 1)",
            [](ConfigFile& c, const std::string& v) {
              c.run.optimizer.beta2 = parse_real_in(v, 0.0, true, 1.0, true);
            },
            [](const ConfigFile& c) { return real(c.run.optimizer.beta2); }},
      Field{"optimizer", "epsilon", "denominator guard (> 0)",
            [](ConfigFile& c, const std::string& v) {
              c.run.optimizer.epsilon_hat =
                  parse_real_in(v, 0.0, true, INFINITY, false);
            },
            [](const ConfigFile& c) {
              return real(c.run.optimizer.epsilon_hat);
            }},
      Field{"oracle", "kind", "synthetic3, synthetic10 or external",
            [](ConfigFile& c, const std::string& v) {
              c.run.oracle.kind = oracle::oracle_kind_from_string(v);
            },
            [](const ConfigFile& c) { return oracle::to_string(c.run.oracle.kind); }},
      QBC_COUNT("oracle", "input_dim", run.oracle.input_dim, 1,
                "parameter count of an external oracle"),
      QBC_COUNT("oracle", "output_length", run.oracle.output_length, 2,
                "spectrum length L"),
      Field{"oracle", "command", "external program and arguments",
            [](ConfigFile& c, const std::string& v) {
              c.run.oracle.external.command = oracle::split_command_line(v);
            },
            [](const ConfigFile& c) {
              return oracle::join_command_line(c.run.oracle.external.command);
            }},
      Field{"oracle", "timeout_s", "seconds per external evaluation (> 0)",
            [](ConfigFile& c, const std::string& v) {
              c.run.oracle.external.timeout_s =
                  parse_real_in(v, 0.0, true, INFINITY, false);
            },
            [](const ConfigFile& c) {
              return real(c.run.oracle.external.timeout_s);
            }},
      Field{"oracle", "cache_path", "evaluation cache file; empty for memory",
            [](ConfigFile& c, const std::string& v) {
              c.run.oracle.external.cache_path = v;
            },
            [](const ConfigFile& c) { return c.run.oracle.external.cache_path; }},
      QBC_COUNT("oracle", "max_concurrency", run.oracle.external.max_concurrency,
                1, "external child processes in flight"),
      Field{"output", "dir", "run directory; empty for the default",
            [](ConfigFile& c, const std::string& v) { c.outdir = v; },
            [](const ConfigFile& c) { return c.outdir; }},
  };
  return table;
}

#undef QBC_COUNT

struct Located {
  std::map<std::string, std::size_t> lines;  // "section.key" -> line

  std::string where(const std::string& origin, const std::string& key) const {
    const auto it = lines.find(key);
    if (it == lines.end()) return origin + ": key '" + key + "' (default)";
    return origin + ":" + std::to_string(it->second) + ": key '" + key + "'";
  }
};

void cross_check(const ConfigFile& c, const Located& at,
                 const std::string& origin) {
  const RunConfig& r = c.run;
  auto fail = [&](const std::string& key, const std::string& msg) {
    throw ConfigError(at.where(origin, key) + ": " + msg);
  };
  const auto& a = r.acquisition;
  if (a.additions_per_epoch > a.blocks_per_epoch * a.candidates_per_block)
    fail("acquisition.additions_per_epoch",
         "must be <= blocks_per_epoch x candidates_per_block (" +
             std::to_string(a.blocks_per_epoch * a.candidates_per_block) +
             ")");
  if (r.recent_window < a.additions_per_epoch)
    fail("run.recent_window", "must be >= additions_per_epoch (" +
                                  std::to_string(a.additions_per_epoch) + ")");
  if (r.epsilon.floor > r.epsilon.epsilon0)
    fail("epsilon.floor", "must be <= epsilon.initial (" +
                              real(r.epsilon.epsilon0) + ")");
  if (r.oracle.kind == oracle::OracleKind::external &&
      r.oracle.external.command.empty())
    fail("oracle.command", "required when oracle.kind = external");
  if (r.space.n != 0 && r.space.n != r.dimension())
    fail("space.ranges", "has " + std::to_string(r.space.n) +
                             " ranges but the oracle takes " +
                             std::to_string(r.dimension()) + " parameters");
  std::size_t blocks = 0;
  try {
    blocks = space::block_count(r.dimension(), r.partitions);
  } catch (const ConfigError& e) {
    fail("space.partitions", e.what());
  }
  if (a.blocks_per_epoch > blocks)
    fail("acquisition.blocks_per_epoch",
         "must be <= the number of blocks (" + std::to_string(blocks) + ")");
  const auto net = nn::preset_by_name(r.preset, r.dimension());
  if (net.output_length() != r.oracle.output_length)
    fail("oracle.output_length",
         "must equal the output length of preset '" + r.preset + "' (" +
             std::to_string(net.output_length()) + ")");
  try {
    r.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace

std::vector<ConfigKey> config_keys() {
  const ConfigFile defaults;
  std::vector<ConfigKey> keys;
  for (const Field& f : fields())
    keys.push_back({f.section, f.name, f.get(defaults), f.help});
  return keys;
}

ConfigFile parse_config_text(std::string_view text, const std::string& origin) {
  ConfigFile c;
  Located at;
  std::string section;
  std::set<std::string> sections;
  for (const Field& f : fields()) sections.insert(f.section);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string here = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(here + "malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!sections.count(section))
        throw ConfigError(here + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(here + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty())
      throw ConfigError(here + "key '" + key + "' appears before any section");
    const std::string full = section + "." + key;
    const Field* field = nullptr;
    for (const Field& f : fields())
      if (section == f.section && key == f.name) field = &f;
    if (!field) throw ConfigError(here + "unknown key '" + full + "'");
    if (at.lines.count(full))
      throw ConfigError(here + "key '" + full + "' repeated (first on line " +
                        std::to_string(at.lines[full]) + ")");
    at.lines[full] = line_no;
    try {
      field->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(here + "key '" + full + "': " + e.what());
    }
  }
  // The oracle kind fixes the dimension of the synthetic problems.
  if (c.run.oracle.kind != oracle::OracleKind::external) {
    if (at.lines.count("oracle.input_dim") &&
        c.run.oracle.input_dim != c.run.oracle.dimension())
      throw ConfigError(at.where(origin, "oracle.input_dim") + ": must be " +
                        std::to_string(c.run.oracle.dimension()) + " for " +
                        oracle::to_string(c.run.oracle.kind));
    c.run.oracle.input_dim = c.run.oracle.dimension();
  }
  cross_check(c, at, origin);
  return c;
}

ConfigFile parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string render_config(const ConfigFile& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += "# " + std::string(f.help) + "\n";
    out += std::string(f.name) + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace qbc::io
