// SPDX-License-Identifier: Apache-2.0
#include "qbc/orchestrator/config.hpp"

#include <cmath>

#include "qbc/errors.hpp"
#include "qbc/nn/network.hpp"

namespace qbc::orchestrator {

space::ParameterSpace RunConfig::resolved_space() const {
  if (space.n == 0) return space::ParameterSpace::unit(dimension());
  return space;
}

void RunConfig::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(ensemble_size >= 2, "ensemble_size must be >= 2");
  need(init_size >= 1, "init_size must be >= 1");
  need(validation_size >= 1, "validation_size must be >= 1");
  need(test_size >= 1, "test_size must be >= 1");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(full_train_period >= 1, "full_train_period must be >= 1");
  need(partitions >= 1, "partitions must be >= 1");
  need(threads >= 1, "threads must be >= 1");
  need(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  acquisition.validate();
  epsilon.validate();
  optimizer.validate();
  oracle.validate();
  need(recent_window >= acquisition.additions_per_epoch,
       "recent_window must be >= additions_per_epoch");
  const std::size_t blocks = space::block_count(dimension(), partitions);
  need(acquisition.blocks_per_epoch <= blocks,
       "blocks_per_epoch must not exceed the number of blocks");
  if (space.n != 0) {
    space.validate();
    need(space.n == dimension(),
         "physical range count must match the oracle dimension");
  }
  const auto net = nn::preset_by_name(preset, dimension());
  if (net.output_length() != oracle.output_length)
    throw ConfigError("preset '" + preset + "' produces length " +
                      std::to_string(net.output_length()) +
                      " but the oracle output_length is " +
                      std::to_string(oracle.output_length));
}

RunConfig synthetic3_defaults() {
  RunConfig c;
  c.epochs = 120;
  c.oracle.kind = oracle::OracleKind::synthetic3;
  c.oracle.input_dim = 3;
  c.acquisition.exploration_mode = acquisition::ExplorationMode::random_blocks;
  return c;
}

RunConfig synthetic10_defaults() {
  RunConfig c;
  c.epochs = 240;
  c.oracle.kind = oracle::OracleKind::synthetic10;
  c.oracle.input_dim = 10;
  c.acquisition.exploration_mode =
      acquisition::ExplorationMode::least_populated;
  c.final_retrain_epochs = 20;
  return c;
}

std::size_t final_dataset_size(const RunConfig& config) {
  return config.init_size +
         config.epochs * config.acquisition.additions_per_epoch;
}

std::size_t retrain_epoch_steps(std::size_t n, std::size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

std::size_t member_step_budget(const RunConfig& config) {
  const std::size_t full_passes =
      (config.epochs + config.full_train_period - 1) / config.full_train_period;
  return config.init_train_steps +
         (config.epochs + full_passes) * config.train_steps_per_epoch +
         config.final_retrain_epochs *
             retrain_epoch_steps(final_dataset_size(config), config.batch_size);
}

}  // namespace qbc::orchestrator
