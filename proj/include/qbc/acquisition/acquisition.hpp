// SPDX-License-Identifier: Apache-2.0
#pragma once

// Choosing what to label next: committee disagreement, the epsilon schedule,
// block selection (exploit by score, explore by protocol), candidate
// generation and instance selection.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qbc/rng.hpp"
#include "qbc/space/space.hpp"

namespace qbc::acquisition {

/// Sum over coordinates of the variance across the l model outputs.
/// Population variance (divide by l) unless `sample_variance`. ConfigError
/// for l < 2, DimensionError for ragged outputs.
double ensemble_disagreement(std::span<const std::vector<double>> outputs,
                             bool sample_variance = false);

struct EpsilonSchedule {
  double epsilon0 = 0.5;
  double decay_rate = 0.99;
  double floor = 0.05;

  void validate() const;

  friend bool operator==(const EpsilonSchedule&,
                         const EpsilonSchedule&) = default;
};

/// max(floor, epsilon0 * decay_rate^t)
double epsilon_at(const EpsilonSchedule& schedule, std::size_t t);

enum class ExplorationMode { random_blocks, least_populated };

std::string to_string(ExplorationMode mode);
ExplorationMode exploration_mode_from_string(const std::string& s);

/// Whether the epsilon draw covers the whole epoch or each added instance.
enum class EpsilonScope { per_epoch, per_instance };

std::string to_string(EpsilonScope scope);
EpsilonScope epsilon_scope_from_string(const std::string& s);

struct AcquisitionConfig {
  std::size_t blocks_per_epoch = 4;       // B
  std::size_t candidates_per_block = 32;  // m
  std::size_t additions_per_epoch = 4;    // k
  std::size_t exploration_period = 10;    // E
  ExplorationMode exploration_mode = ExplorationMode::random_blocks;
  EpsilonScope epsilon_scope = EpsilonScope::per_epoch;
  bool sample_variance = false;

  void validate() const;

  friend bool operator==(const AcquisitionConfig&,
                         const AcquisitionConfig&) = default;
};

/// t mod E == 0, which includes t = 0.
bool is_exploration_epoch(std::size_t t, std::size_t period);

struct BlockChoice {
  std::vector<std::size_t> blocks;  // linear indices
  bool exploration = false;
};

/// Exploration epochs: B distinct uniformly random blocks, or the B blocks
/// with the fewest instances. Other epochs: the B highest block scores.
/// Ties go to the lexicographically smaller block. ConfigError if B exceeds
/// the number of blocks.
BlockChoice choose_blocks(const space::BlockGrid& grid,
                          const AcquisitionConfig& config, std::size_t t,
                          double gamma, Rng& rng);

struct Candidate {
  space::Point x;
  std::size_t block = 0;  // linear index of the source block
};

/// m uniform points in each listed block, in block order.
std::vector<Candidate> generate_candidates(std::span<const std::size_t> blocks,
                                           std::size_t m, std::size_t n,
                                           std::size_t p, Rng& rng);

struct InstanceChoice {
  std::vector<std::size_t> indices;  // into the candidate list
  std::vector<bool> random;          // per index: chosen by the epsilon branch
};

/// Per-epoch scope: one Bernoulli(epsilon) draw; on success k distinct
/// uniformly random candidates, otherwise the k largest uncertainties (ties
/// to the earlier candidate). Per-instance scope repeats the draw for each
/// of the k slots over the not yet chosen candidates. ConfigError if k is
/// larger than the pool.
InstanceChoice choose_instances(std::span<const double> uncertainties,
                                std::size_t k, double epsilon,
                                EpsilonScope scope, Rng& rng);

}  // namespace qbc::acquisition
