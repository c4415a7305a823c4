// SPDX-License-Identifier: Apache-2.0
#include "qbc/nn/optim.hpp"

#include <cmath>
#include <string>

#include "qbc/errors.hpp"
#include "qbc/simd/kernels.hpp"

namespace qbc::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ConfigError("optimizer: learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0))
    throw ConfigError("optimizer: beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("optimizer: beta2 must lie in (0, 1)");
  if (!(epsilon_hat > 0.0))
    throw ConfigError("optimizer: epsilon_hat must be > 0");
}

void adam_step(ModelState& state, const Gradients& grads,
               const OptimizerConfig& opt) {
  if (grads.size() != state.params.size())
    throw DimensionError("adam: " + std::to_string(grads.size()) +
                         " gradient arrays for " +
                         std::to_string(state.params.size()) + " parameters");
  for (std::size_t i = 0; i < grads.size(); ++i)
    grads[i].require_shape(state.params[i].shape(), "adam gradient");

  const double t = static_cast<double>(state.step + 1);
  const simd::AdamCoeffs c{opt.learning_rate,
                           opt.beta1,
                           opt.beta2,
                           opt.epsilon_hat,
                           1.0 - std::pow(opt.beta1, t),
                           1.0 - std::pow(opt.beta2, t)};
  const auto& k = simd::active();
  for (std::size_t i = 0; i < grads.size(); ++i)
    k.adam_update(state.params[i].data(), state.m[i].data(), state.v[i].data(),
                  grads[i].data(), grads[i].size(), c);
  ++state.step;
}

double mse(std::span<const double> prediction, std::span<const double> target) {
  if (prediction.size() != target.size())
    throw DimensionError("mse: prediction length " +
                         std::to_string(prediction.size()) +
                         " != target length " + std::to_string(target.size()));
  if (prediction.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double r = prediction[i] - target[i];
    s += r * r;
  }
  return s / static_cast<double>(prediction.size());
}

}  // namespace qbc::nn
