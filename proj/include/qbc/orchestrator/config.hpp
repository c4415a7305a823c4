// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "qbc/acquisition/acquisition.hpp"
#include "qbc/nn/optim.hpp"
#include "qbc/oracle/oracle.hpp"
#include "qbc/space/space.hpp"

namespace qbc::orchestrator {

struct RunConfig {
  std::size_t epochs = 120;                 // T
  std::size_t ensemble_size = 3;            // l
  std::size_t init_size = 32;
  std::size_t init_train_steps = 200;       // steps on the seed set
  std::size_t train_steps_per_epoch = 50;
  std::size_t recent_window = 64;           // R
  std::size_t full_train_period = 10;       // P
  std::size_t final_retrain_epochs = 0;     // F
  std::size_t validation_size = 300;
  std::size_t test_size = 400;
  std::size_t batch_size = 8;
  std::size_t partitions = 2;               // p
  double gamma = 0.9;
  acquisition::AcquisitionConfig acquisition;
  acquisition::EpsilonSchedule epsilon;
  std::string preset = "desk-64";
  nn::OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  oracle::OracleSpec oracle;
  /// Physical ranges handed to an external oracle; empty means unit ranges.
  space::ParameterSpace space;
  std::size_t threads = 1;
  bool deterministic = false;

  /// Input dimension implied by the oracle.
  std::size_t dimension() const { return oracle.dimension(); }

  /// `space` if set, unit ranges otherwise.
  space::ParameterSpace resolved_space() const;

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Defaults for the 3-parameter synthetic problem.
RunConfig synthetic3_defaults();
/// Defaults for the 10-parameter synthetic problem (T = 240,
/// least-populated exploration, F = 20).
RunConfig synthetic10_defaults();

/// Dataset size after the last epoch: init_size + T k.
std::size_t final_dataset_size(const RunConfig& config);

/// Optimizer steps one ensemble member takes over a complete run, including
/// seed training, full-dataset passes and the final retrain.
std::size_t member_step_budget(const RunConfig& config);

/// Steps in one final-retrain epoch over `n` instances.
std::size_t retrain_epoch_steps(std::size_t n, std::size_t batch_size);

}  // namespace qbc::orchestrator
