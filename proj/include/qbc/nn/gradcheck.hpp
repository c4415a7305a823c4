// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "qbc/nn/array.hpp"

namespace qbc::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_array = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
/// gradient is ~0 from dominating through round-off in the difference
/// quotient.
double gradient_relative_error(double analytic, double numeric,
                               double floor = 1e-7);

/// Perturbs every entry of every array in `inputs` by +-h, evaluates `loss`,
/// and compares the central difference with the matching entry of
/// `analytic`. Inputs are restored afterwards.
GradCheckReport check_gradients(const std::function<double()>& loss,
                                std::span<Array* const> inputs,
                                std::span<const Array> analytic,
                                double h = 1e-5, double floor = 1e-7);

}  // namespace qbc::nn
