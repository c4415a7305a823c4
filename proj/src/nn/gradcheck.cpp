// SPDX-License-Identifier: Apache-2.0
#include "qbc/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "qbc/errors.hpp"

namespace qbc::nn {

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(const std::function<double()>& loss,
                                std::span<Array* const> inputs,
                                std::span<const Array> analytic, double h,
                                double floor) {
  if (inputs.size() != analytic.size())
    throw DimensionError("gradcheck: input/gradient array count mismatch");
  GradCheckReport report;
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    Array& x = *inputs[a];
    analytic[a].require_shape(x.shape(), "gradcheck");
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double orig = x[i];
      x[i] = orig + h;
      const double up = loss();
      x[i] = orig - h;
      const double down = loss();
      x[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = gradient_relative_error(analytic[a][i], numeric, floor);
      ++report.checked;
      if (err > report.max_relative_error || report.checked == 1) {
        report.max_relative_error = err;
        report.worst_array = a;
        report.worst_index = i;
        report.analytic = analytic[a][i];
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace qbc::nn
