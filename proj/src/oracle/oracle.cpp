// SPDX-License-Identifier: Apache-2.0
#include "qbc/oracle/oracle.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <thread>

#include "qbc/errors.hpp"
#include "qbc/oracle/subprocess.hpp"
#include "qbc/oracle/synthetic.hpp"

namespace qbc::oracle {

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::synthetic3: return "synthetic3";
    case OracleKind::synthetic10: return "synthetic10";
    case OracleKind::external: return "external";
  }
  return "?";
}

OracleKind oracle_kind_from_string(const std::string& s) {
  if (s == "synthetic3") return OracleKind::synthetic3;
  if (s == "synthetic10") return OracleKind::synthetic10;
  if (s == "external") return OracleKind::external;
  throw ConfigError("oracle '" + s +
                    "' (expected synthetic3, synthetic10 or external)");
}

void ExternalOracleConfig::validate() const {
  if (!(timeout_s > 0.0) || !std::isfinite(timeout_s))
    throw ConfigError("external oracle timeout must be > 0 seconds");
  if (max_concurrency < 1)
    throw ConfigError("external oracle max_concurrency must be >= 1");
}

std::size_t OracleSpec::dimension() const {
  switch (kind) {
    case OracleKind::synthetic3: return 3;
    case OracleKind::synthetic10: return 10;
    case OracleKind::external: return input_dim;
  }
  return input_dim;
}

void OracleSpec::validate() const {
  if (output_length < 2) throw ConfigError("oracle output_length must be >= 2");
  if (kind == OracleKind::external) {
    if (input_dim < 1) throw ConfigError("external oracle input_dim must be >= 1");
    if (external.command.empty())
      throw ConfigError("external oracle requires a command");
    external.validate();
  }
}

std::vector<std::vector<double>> Oracle::evaluate_many(
    std::span<const space::Point> unit_thetas) {
  std::vector<std::vector<double>> out;
  out.reserve(unit_thetas.size());
  for (const auto& t : unit_thetas) out.push_back(evaluate(t));
  return out;
}

// ---- synthetic ----------------------------------------------------------------

SyntheticOracle::SyntheticOracle(OracleKind kind, std::size_t output_length)
    : kind_(kind), length_(output_length) {
  if (kind == OracleKind::external)
    throw ConfigError("SyntheticOracle cannot be external");
  spectrum_grid(length_);  // validates L
}

std::string SyntheticOracle::name() const { return to_string(kind_); }

std::size_t SyntheticOracle::input_dim() const {
  return kind_ == OracleKind::synthetic3 ? 3 : 10;
}

std::vector<double> SyntheticOracle::evaluate(
    std::span<const double> unit_theta) {
  return kind_ == OracleKind::synthetic3 ? synthetic3(unit_theta, length_)
                                         : synthetic10(unit_theta, length_);
}

// ---- external -----------------------------------------------------------------

std::vector<double> parse_spectrum_line(const std::string& text,
                                        std::size_t length) {
  const std::size_t eol = text.find('\n');
  const std::string line = text.substr(0, eol);
  std::vector<double> y;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' &&
                              *next != '\r'))
      throw OracleError("external oracle: malformed number in response at "
                        "column " + std::to_string(p - line.data() + 1) +
                        ": '" + line.substr(0, 80) + "'");
    if (!std::isfinite(v))
      throw OracleError("external oracle: non-finite value in response");
    y.push_back(v);
    p = next;
  }
  if (y.size() != length)
    throw OracleError("external oracle: response has " +
                      std::to_string(y.size()) + " values, expected " +
                      std::to_string(length));
  return y;
}

std::string render_request_line(std::span<const double> values) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    if (i > 0) s += ' ';
    s += buf;
  }
  s += '\n';
  return s;
}

ExternalOracle::ExternalOracle(ExternalOracleConfig config,
                               space::ParameterSpace space,
                               std::size_t output_length)
    : config_(std::move(config)), space_(std::move(space)),
      length_(output_length) {
  config_.validate();
  space_.validate();
  if (config_.command.empty())
    throw ConfigError("external oracle requires a command");
  if (length_ < 1) throw ConfigError("external oracle output_length must be >= 1");
  cache_ = config_.cache_path.empty()
               ? std::make_unique<EvalCache>()
               : std::make_unique<EvalCache>(config_.cache_path);
}

std::vector<double> ExternalOracle::evaluate(
    std::span<const double> unit_theta) {
  return evaluate_physical(space_.scale(unit_theta));
}

std::vector<double> ExternalOracle::evaluate_physical(
    std::span<const double> physical) {
  if (physical.size() != space_.n)
    throw DimensionError("external oracle: expected " +
                         std::to_string(space_.n) + " inputs, got " +
                         std::to_string(physical.size()));
  const std::string key = cache_key(physical);
  if (auto hit = cache_->lookup(key)) {
    ++hits_;
    return *hit;
  }
  ++launches_;
  const auto timeout = std::chrono::milliseconds(
      static_cast<long long>(std::ceil(config_.timeout_s * 1000.0)));
  const ChildResult r =
      run_child(config_.command, render_request_line(physical), timeout);
  const std::string diag =
      r.err.empty() ? std::string() : " (stderr: " + r.err.substr(0, 400) + ")";
  if (r.timed_out)
    throw OracleError("external oracle: timed out after " +
                      std::to_string(config_.timeout_s) + " s for input [" +
                      key + "]" + diag);
  if (r.signal != 0)
    throw OracleError("external oracle: killed by signal " +
                      std::to_string(r.signal) + diag);
  if (r.exit_code != 0)
    throw OracleError("external oracle: exit code " +
                      std::to_string(r.exit_code) + " for input [" + key +
                      "]" + diag);
  std::vector<double> y;
  try {
    y = parse_spectrum_line(r.out, length_);
  } catch (const OracleError& e) {
    throw OracleError(std::string(e.what()) + diag);
  }
  cache_->insert(key, y);
  return y;
}

std::vector<std::vector<double>> ExternalOracle::evaluate_many(
    std::span<const space::Point> unit_thetas) {
  const std::size_t n = unit_thetas.size();
  std::vector<std::vector<double>> out(n);
  const std::size_t width = std::max<std::size_t>(1, config_.max_concurrency);
  for (std::size_t start = 0; start < n; start += width) {
    const std::size_t stop = std::min(n, start + width);
    std::vector<std::exception_ptr> errors(stop - start);
    std::vector<std::thread> workers;
    for (std::size_t i = start; i < stop; ++i) {
      auto job = [&, i] {
        try {
          out[i] = evaluate(unit_thetas[i]);
        } catch (...) {
          errors[i - start] = std::current_exception();
        }
      };
      if (width == 1) {
        job();
      } else {
        workers.emplace_back(job);
      }
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec,
                                    const space::ParameterSpace& space) {
  spec.validate();
  if (space.n != spec.dimension())
    throw ConfigError("oracle " + to_string(spec.kind) + " takes " +
                      std::to_string(spec.dimension()) +
                      " parameters but the parameter space has " +
                      std::to_string(space.n));
  if (spec.kind == OracleKind::external)
    return std::make_unique<ExternalOracle>(spec.external, space,
                                            spec.output_length);
  return std::make_unique<SyntheticOracle>(spec.kind, spec.output_length);
}

}  // namespace qbc::oracle
