// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qbc/oracle/cache.hpp"
#include "qbc/space/space.hpp"

namespace qbc::oracle {

enum class OracleKind { synthetic3, synthetic10, external };

std::string to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& s);

struct ExternalOracleConfig {
  std::vector<std::string> command;  // program + arguments
  double timeout_s = 60.0;
  std::string cache_path;            // empty: in-memory cache only
  std::size_t max_concurrency = 1;   // child processes in flight

  void validate() const;

  friend bool operator==(const ExternalOracleConfig&,
                         const ExternalOracleConfig&) = default;
};

struct OracleSpec {
  OracleKind kind = OracleKind::synthetic3;
  std::size_t input_dim = 3;   // declared for external, fixed otherwise
  std::size_t output_length = 64;
  ExternalOracleConfig external;

  /// Dimension implied by the kind (3, 10 or the declared one).
  std::size_t dimension() const;
  void validate() const;

  friend bool operator==(const OracleSpec&, const OracleSpec&) = default;
};

/// Labels unit-cube points with spectra.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual std::string name() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_length() const = 0;

  virtual std::vector<double> evaluate(std::span<const double> unit_theta) = 0;

  /// All-or-nothing: throws on the first failure.
  virtual std::vector<std::vector<double>> evaluate_many(
      std::span<const space::Point> unit_thetas);
};

class SyntheticOracle final : public Oracle {
 public:
  SyntheticOracle(OracleKind kind, std::size_t output_length);

  std::string name() const override;
  std::size_t input_dim() const override;
  std::size_t output_length() const override { return length_; }
  std::vector<double> evaluate(std::span<const double> unit_theta) override;

 private:
  OracleKind kind_;
  std::size_t length_;
};

/// Line protocol: one line of n space-separated reals (physical units) on the
/// child's stdin, one line of L reals expected on stdout, exit code 0.
class ExternalOracle final : public Oracle {
 public:
  ExternalOracle(ExternalOracleConfig config, space::ParameterSpace space,
                 std::size_t output_length);

  std::string name() const override { return "external"; }
  std::size_t input_dim() const override { return space_.n; }
  std::size_t output_length() const override { return length_; }
  std::vector<double> evaluate(std::span<const double> unit_theta) override;
  std::vector<std::vector<double>> evaluate_many(
      std::span<const space::Point> unit_thetas) override;

  /// Evaluates a point given directly in physical units.
  std::vector<double> evaluate_physical(std::span<const double> physical);

  std::size_t launches() const noexcept { return launches_; }
  std::size_t cache_hits() const noexcept { return hits_; }
  const EvalCache& cache() const noexcept { return *cache_; }

 private:
  ExternalOracleConfig config_;
  space::ParameterSpace space_;
  std::size_t length_;
  std::unique_ptr<EvalCache> cache_;
  std::atomic<std::size_t> launches_{0};
  std::atomic<std::size_t> hits_{0};
};

/// Parses one response line into exactly `length` finite reals; OracleError
/// otherwise.
std::vector<double> parse_spectrum_line(const std::string& text,
                                        std::size_t length);

/// Reals rendered with round-trip precision, single-space separated, with a
/// trailing newline.
std::string render_request_line(std::span<const double> values);

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec,
                                    const space::ParameterSpace& space);

}  // namespace qbc::oracle
