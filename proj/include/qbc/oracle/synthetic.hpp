// SPDX-License-Identifier: Apache-2.0
#pragma once

// Closed-form stand-ins for the two simulators: a 3-parameter peak pair and a
// 10-parameter three-line spectrum with a sloped continuum. Both are sampled
// on x_j = j / (L - 1).

#include <cstddef>
#include <span>
#include <vector>

namespace qbc::oracle {

/// x_j = j / (L - 1), j = 0..L-1. DimensionError for L < 2.
std::vector<double> spectrum_grid(std::size_t length);

/// Profile of synthetic3 at a single abscissa x.
double synthetic3_at(std::span<const double> theta, double x);
/// Profile of synthetic10 at a single abscissa x.
double synthetic10_at(std::span<const double> theta, double x);

/// mu = 0.2 + 0.6 t1, sigma = 0.02 + 0.1 t2, A = 0.5 + t3;
/// y = A g(x; mu, sigma) + 0.1 A g(x; mu - 0.15, 2 sigma), g unnormalised.
std::vector<double> synthetic3(std::span<const double> theta,
                               std::size_t length);

/// Lines i = 1..3: mu = 0.1 + 0.8 t(3i-2), sigma = 0.01 + 0.05 t(3i-1),
/// A = 0.2 + 0.8 t(3i); plus 0.2 t10 x.
std::vector<double> synthetic10(std::span<const double> theta,
                                std::size_t length);

}  // namespace qbc::oracle
