// SPDX-License-Identifier: Apache-2.0
#include "qbc/oracle/synthetic.hpp"

#include <cmath>
#include <string>

#include "qbc/errors.hpp"
#include "qbc/space/space.hpp"

namespace qbc::oracle {
namespace {

void check_theta(std::span<const double> theta, std::size_t n,
                 const char* what) {
  if (theta.size() != n)
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(n) + " parameters, got " +
                         std::to_string(theta.size()));
  space::require_unit_cube(theta, what);
}

double gauss(double x, double mu, double sigma) {
  const double z = x - mu;
  return std::exp(-(z * z) / (2.0 * sigma * sigma));
}

double s3(std::span<const double> t, double x) {
  const double mu = 0.2 + 0.6 * t[0];
  const double sigma = 0.02 + 0.1 * t[1];
  const double a = 0.5 + t[2];
  return a * gauss(x, mu, sigma) + 0.1 * a * gauss(x, mu - 0.15, 2.0 * sigma);
}

double s10(std::span<const double> t, double x) {
  double y = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double mu = 0.1 + 0.8 * t[3 * i];
    const double sigma = 0.01 + 0.05 * t[3 * i + 1];
    const double a = 0.2 + 0.8 * t[3 * i + 2];
    y += a * gauss(x, mu, sigma);
  }
  return y + 0.2 * t[9] * x;
}

}  // namespace

std::vector<double> spectrum_grid(std::size_t length) {
  if (length < 2)
    throw DimensionError("spectrum length must be >= 2, got " +
                         std::to_string(length));
  std::vector<double> x(length);
  const double step = static_cast<double>(length - 1);
  for (std::size_t j = 0; j < length; ++j) x[j] = static_cast<double>(j) / step;
  return x;
}

double synthetic3_at(std::span<const double> theta, double x) {
  check_theta(theta, 3, "synthetic3");
  return s3(theta, x);
}

double synthetic10_at(std::span<const double> theta, double x) {
  check_theta(theta, 10, "synthetic10");
  return s10(theta, x);
}

std::vector<double> synthetic3(std::span<const double> theta,
                               std::size_t length) {
  check_theta(theta, 3, "synthetic3");
  std::vector<double> y = spectrum_grid(length);
  for (auto& v : y) v = s3(theta, v);
  return y;
}

std::vector<double> synthetic10(std::span<const double> theta,
                                std::size_t length) {
  check_theta(theta, 10, "synthetic10");
  std::vector<double> y = spectrum_grid(length);
  for (auto& v : y) v = s10(theta, v);
  return y;
}

}  // namespace qbc::oracle
