// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "qbc/nn/array.hpp"
#include "qbc/nn/network.hpp"

namespace qbc::nn {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_hat = 1e-8;

  void validate() const;

  friend bool operator==(const OptimizerConfig&,
                         const OptimizerConfig&) = default;
};

/// One Adam step with bias correction; increments state.step by one.
void adam_step(ModelState& state, const Gradients& grads,
               const OptimizerConfig& opt);

/// Mean over coordinates of squared differences.
double mse(std::span<const double> prediction, std::span<const double> target);

}  // namespace qbc::nn
