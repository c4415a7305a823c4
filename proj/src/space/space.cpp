// SPDX-License-Identifier: Apache-2.0
#include "qbc/space/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qbc/errors.hpp"

namespace qbc::space {

ParameterSpace ParameterSpace::unit(std::size_t n) {
  ParameterSpace s;
  s.n = n;
  s.physical_ranges.assign(n, {0.0, 1.0});
  return s;
}

void ParameterSpace::validate() const {
  if (n == 0) throw ConfigError("parameter space: dimension must be >= 1");
  if (physical_ranges.size() != n)
    throw ConfigError("parameter space: " +
                      std::to_string(physical_ranges.size()) +
                      " physical ranges given for " + std::to_string(n) +
                      " dimensions");
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = physical_ranges[i];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ConfigError("parameter space: range " + std::to_string(i) +
                        " must satisfy lo < hi (got " + std::to_string(lo) +
                        ", " + std::to_string(hi) + ")");
  }
}

Point ParameterSpace::scale(std::span<const double> unit_x) const {
  if (unit_x.size() != n)
    throw DimensionError("scale: point has " + std::to_string(unit_x.size()) +
                         " coordinates, space has " + std::to_string(n));
  require_unit_cube(unit_x, "scale");
  Point out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = physical_ranges[i];
    out[i] = lo + unit_x[i] * (hi - lo);
  }
  return out;
}

Point ParameterSpace::unscale(std::span<const double> physical_x) const {
  if (physical_x.size() != n)
    throw DimensionError("unscale: point has " +
                         std::to_string(physical_x.size()) +
                         " coordinates, space has " + std::to_string(n));
  Point out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = physical_ranges[i];
    const double v = physical_x[i];
    if (!(v >= lo && v <= hi))
      throw DomainError("unscale: coordinate " + std::to_string(i) + " = " +
                        std::to_string(v) + " outside [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
    out[i] = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  }
  return out;
}

void require_unit_cube(std::span<const double> x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0 && x[i] <= 1.0))
      throw DomainError(std::string(what) + ": coordinate " +
                        std::to_string(i) + " = " + std::to_string(x[i]) +
                        " is outside [0, 1]");
}

std::size_t stratum_of(double v, std::size_t p) {
  if (v >= 1.0) return p - 1;
  auto j = static_cast<std::size_t>(std::floor(v * static_cast<double>(p)));
  j = std::min(j, p - 1);
  // v * p can round across an edge; settle against the edges themselves.
  while (j > 0 && v < stratum_edge(j, p)) --j;
  while (j + 1 < p && v >= stratum_edge(j + 1, p)) ++j;
  return j;
}

double uniform_half_open(double lo, double hi, Rng& rng) {
  const double v = lo + (hi - lo) * rng.uniform();
  return v < hi ? std::max(v, lo) : std::nextafter(hi, lo);
}

BlockIndex block_index(std::span<const double> x, std::size_t p) {
  if (p == 0) throw ConfigError("block_index: p must be >= 1");
  require_unit_cube(x, "block_index");
  BlockIndex idx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) idx[i] = stratum_of(x[i], p);
  return idx;
}

std::size_t block_count(std::size_t n, std::size_t p) {
  if (p == 0) throw ConfigError("block grid: p must be >= 1");
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / p)
      throw ConfigError("block grid: p^n = " + std::to_string(p) + "^" +
                        std::to_string(n) + " blocks is too large");
    total *= p;
  }
  return total;
}

std::size_t block_linear(const BlockIndex& block, std::size_t p) {
  std::size_t linear = 0;
  for (std::size_t j : block) {
    if (j >= p)
      throw DomainError("block index component " + std::to_string(j) +
                        " outside [0, " + std::to_string(p) + ")");
    linear = linear * p + j;
  }
  return linear;
}

BlockIndex block_from_linear(std::size_t linear, std::size_t n,
                             std::size_t p) {
  BlockIndex idx(n);
  for (std::size_t i = n; i-- > 0;) {
    idx[i] = linear % p;
    linear /= p;
  }
  if (linear != 0)
    throw DomainError("linear block index outside the grid");
  return idx;
}

std::vector<Point> lhs_sample(std::size_t m, std::size_t n, Rng& rng) {
  if (m == 0) throw ConfigError("lhs_sample: m must be >= 1");
  std::vector<Point> pts(m, Point(n));
  std::vector<std::size_t> perm(m);
  for (std::size_t d = 0; d < n; ++d) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    for (std::size_t i = 0; i < m; ++i)
      pts[i][d] = uniform_half_open(stratum_edge(perm[i], m),
                                    stratum_edge(perm[i] + 1, m), rng);
  }
  return pts;
}

std::vector<Point> sample_in_block(const BlockIndex& block, std::size_t p,
                                   std::size_t m, Rng& rng) {
  for (std::size_t j : block)
    if (j >= p)
      throw DomainError("sample_in_block: index component " +
                        std::to_string(j) + " outside [0, " +
                        std::to_string(p) + ")");
  std::vector<Point> pts(m, Point(block.size()));
  for (auto& pt : pts)
    for (std::size_t d = 0; d < block.size(); ++d)
      pt[d] = uniform_half_open(stratum_edge(block[d], p),
                                stratum_edge(block[d] + 1, p), rng);
  return pts;
}

double block_score(const BlockRecord& record, std::size_t current_epoch,
                   double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw ConfigError("block_score: gamma must be in (0, 1], got " +
                      std::to_string(gamma));
  if (record.entries.empty()) return 0.0;
  (void)current_epoch;
  // The common factor gamma^(current - newest) cancels in the ratio; ages
  // are taken relative to the newest entry so no weight underflows to 0.
  std::size_t newest = 0;
  for (const auto& e : record.entries) newest = std::max(newest, e.epoch);
  double num = 0.0;
  double den = 0.0;
  for (const auto& e : record.entries) {
    const double w = std::pow(gamma, static_cast<double>(newest - e.epoch));
    num += w * e.uncertainty;
    den += w;
  }
  return num / den;
}

BlockGrid::BlockGrid(std::size_t n, std::size_t p)
    : n_(n), p_(p), total_(block_count(n, p)) {
  if (n == 0) throw ConfigError("block grid: dimension must be >= 1");
}

std::size_t BlockGrid::record(std::span<const double> x, double uncertainty,
                              std::size_t epoch) {
  if (x.size() != n_)
    throw DimensionError("block grid: point has " + std::to_string(x.size()) +
                         " coordinates, grid has " + std::to_string(n_));
  if (!(uncertainty >= 0.0) || !std::isfinite(uncertainty))
    throw DomainError("block grid: uncertainty must be finite and >= 0");
  const std::size_t linear = block_linear(block_index(x, p_), p_);
  blocks_[linear].entries.push_back({uncertainty, epoch});
  ++instances_;
  return linear;
}

const BlockRecord& BlockGrid::at(std::size_t linear) const {
  static const BlockRecord empty;
  const auto it = blocks_.find(linear);
  return it == blocks_.end() ? empty : it->second;
}

std::size_t BlockGrid::count(std::size_t linear) const {
  return at(linear).instance_count();
}

}  // namespace qbc::space
