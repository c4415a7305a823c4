// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qbc/orchestrator/config.hpp"

namespace qbc::testing {

/// synthetic3 on the paper-literal preset (spectra of length 6) with small
/// step counts and reference sets, so full runs take well under a second.
inline orchestrator::RunConfig small_run_config(std::uint64_t seed = 1) {
  orchestrator::RunConfig c = orchestrator::synthetic3_defaults();
  c.preset = "paper-literal";
  c.oracle.output_length = 6;
  c.epochs = 6;
  c.init_size = 8;
  c.init_train_steps = 10;
  c.train_steps_per_epoch = 4;
  c.recent_window = 8;
  c.full_train_period = 2;
  c.validation_size = 16;
  c.test_size = 16;
  c.acquisition.candidates_per_block = 6;
  c.seed = seed;
  c.deterministic = true;
  return c;
}

}  // namespace qbc::testing
