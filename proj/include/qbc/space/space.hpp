// SPDX-License-Identifier: Apache-2.0
#pragma once

// The n-unit cube: affine scaling to simulator units, the p^n block grid,
// per-block uncertainty records and the samplers that seed and probe it.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qbc/rng.hpp"

namespace qbc::space {

using Point = std::vector<double>;
using BlockIndex = std::vector<std::size_t>;

struct ParameterSpace {
  std::size_t n = 0;
  /// (lo, hi) per axis in physical units.
  std::vector<std::pair<double, double>> physical_ranges;

  /// Unit ranges on every axis.
  static ParameterSpace unit(std::size_t n);

  /// Throws ConfigError on n == 0, a range count other than n, or lo >= hi.
  void validate() const;

  /// lo + x (hi - lo) per coordinate. DomainError outside the unit cube.
  Point scale(std::span<const double> unit_x) const;
  /// Inverse of scale. DomainError outside the physical ranges.
  Point unscale(std::span<const double> physical_x) const;

  friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;
};

/// DomainError unless every coordinate is finite and in [0, 1].
void require_unit_cube(std::span<const double> x, const char* what);

/// Lower edge j / p of stratum j, computed the same way everywhere so that
/// membership tests agree bit for bit.
inline double stratum_edge(std::size_t j, std::size_t p) {
  return static_cast<double>(j) / static_cast<double>(p);
}

/// Stratum of coordinate v in [0, 1]: the j with edge(j) <= v < edge(j+1),
/// and p - 1 for v == 1.
std::size_t stratum_of(double v, std::size_t p);

/// Uniform draw in [lo, hi); never returns hi even after rounding.
double uniform_half_open(double lo, double hi, Rng& rng);

/// floor(p x_i) per axis with the top edge clamped to p - 1.
BlockIndex block_index(std::span<const double> x, std::size_t p);

/// p^n; ConfigError when it does not fit in 64 bits or p == 0.
std::size_t block_count(std::size_t n, std::size_t p);

/// Row-major (first axis most significant) position of a block, so numeric
/// order equals lexicographic order of index tuples.
std::size_t block_linear(const BlockIndex& block, std::size_t p);
BlockIndex block_from_linear(std::size_t linear, std::size_t n, std::size_t p);

/// Latin hypercube: in every dimension each of the m strata [j/m, (j+1)/m)
/// holds exactly one point.
std::vector<Point> lhs_sample(std::size_t m, std::size_t n, Rng& rng);

/// m points uniform over the half-open rectangle of `block`. DomainError on
/// an index outside [0, p).
std::vector<Point> sample_in_block(const BlockIndex& block, std::size_t p,
                                   std::size_t m, Rng& rng);

struct BlockEntry {
  double uncertainty = 0.0;
  std::size_t epoch = 0;

  friend bool operator==(const BlockEntry&, const BlockEntry&) = default;
};

struct BlockRecord {
  std::vector<BlockEntry> entries;

  std::size_t instance_count() const noexcept { return entries.size(); }

  friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

/// Weighted mean of uncertainties with weights gamma^(epoch - epoch_added);
/// 0 for an empty record. ConfigError unless gamma is in (0, 1].
double block_score(const BlockRecord& record, std::size_t current_epoch,
                   double gamma);

class BlockGrid {
 public:
  BlockGrid() = default;
  BlockGrid(std::size_t n, std::size_t p);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t partitions() const noexcept { return p_; }
  std::size_t block_total() const noexcept { return total_; }
  std::size_t instance_total() const noexcept { return instances_; }
  /// Blocks holding at least one instance.
  std::size_t occupied_blocks() const noexcept { return blocks_.size(); }

  /// Appends (uncertainty, epoch) to the block containing x and returns that
  /// block's linear index. DomainError outside the cube or for a negative or
  /// non-finite uncertainty.
  std::size_t record(std::span<const double> x, double uncertainty,
                     std::size_t epoch);

  /// Empty record for unpopulated blocks.
  const BlockRecord& at(std::size_t linear) const;
  std::size_t count(std::size_t linear) const;

  /// Populated blocks keyed by linear index.
  const std::map<std::size_t, BlockRecord>& populated() const noexcept {
    return blocks_;
  }

  friend bool operator==(const BlockGrid&, const BlockGrid&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 1;
  std::size_t total_ = 1;
  std::size_t instances_ = 0;
  std::map<std::size_t, BlockRecord> blocks_;
};

}  // namespace qbc::space
