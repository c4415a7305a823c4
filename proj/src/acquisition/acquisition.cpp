// SPDX-License-Identifier: Apache-2.0
#include "qbc/acquisition/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "qbc/errors.hpp"

namespace qbc::acquisition {

double ensemble_disagreement(std::span<const std::vector<double>> outputs,
                             bool sample_variance) {
  const std::size_t l = outputs.size();
  if (l < 2)
    throw ConfigError("ensemble_disagreement: needs at least 2 models, got " +
                      std::to_string(l));
  const std::size_t d = outputs[0].size();
  for (const auto& o : outputs)
    if (o.size() != d)
      throw DimensionError("ensemble_disagreement: model outputs differ in "
                           "length");
  // Welford per coordinate.
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      const double v = outputs[i][j];
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
    }
    total += m2 / static_cast<double>(sample_variance ? l - 1 : l);
  }
  return total;
}

void EpsilonSchedule::validate() const {
  if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0))
    throw ConfigError("epsilon0 must be in [0, 1]");
  if (!(decay_rate > 0.0 && decay_rate <= 1.0))
    throw ConfigError("epsilon decay_rate must be in (0, 1]");
  if (!(floor >= 0.0 && floor <= 1.0))
    throw ConfigError("epsilon floor must be in [0, 1]");
  if (floor > epsilon0) throw ConfigError("epsilon floor must be <= epsilon0");
}

double epsilon_at(const EpsilonSchedule& s, std::size_t t) {
  return std::max(s.floor,
                  s.epsilon0 * std::pow(s.decay_rate, static_cast<double>(t)));
}

std::string to_string(ExplorationMode mode) {
  return mode == ExplorationMode::random_blocks ? "random-blocks"
                                                : "least-populated";
}

ExplorationMode exploration_mode_from_string(const std::string& s) {
  if (s == "random-blocks") return ExplorationMode::random_blocks;
  if (s == "least-populated") return ExplorationMode::least_populated;
  throw ConfigError("exploration mode '" + s +
                    "' (expected random-blocks or least-populated)");
}

std::string to_string(EpsilonScope scope) {
  return scope == EpsilonScope::per_epoch ? "per-epoch" : "per-instance";
}

EpsilonScope epsilon_scope_from_string(const std::string& s) {
  if (s == "per-epoch") return EpsilonScope::per_epoch;
  if (s == "per-instance") return EpsilonScope::per_instance;
  throw ConfigError("epsilon scope '" + s +
                    "' (expected per-epoch or per-instance)");
}

void AcquisitionConfig::validate() const {
  if (blocks_per_epoch < 1) throw ConfigError("blocks_per_epoch must be >= 1");
  if (candidates_per_block < 1)
    throw ConfigError("candidates_per_block must be >= 1");
  if (additions_per_epoch < 1 ||
      additions_per_epoch > blocks_per_epoch * candidates_per_block)
    throw ConfigError(
        "additions_per_epoch must be in [1, blocks_per_epoch x "
        "candidates_per_block]");
  if (exploration_period < 1)
    throw ConfigError("exploration_period must be >= 1");
}

bool is_exploration_epoch(std::size_t t, std::size_t period) {
  return period > 0 && t % period == 0;
}

namespace {

// B distinct values from [0, total), uniformly (Floyd's algorithm), returned
// in draw order.
std::vector<std::size_t> distinct_uniform(std::size_t count, std::size_t total,
                                          Rng& rng) {
  std::vector<std::size_t> picked;
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = total - count; j < total; ++j) {
    const std::size_t r = rng.index(j + 1);
    if (seen.insert(r).second) {
      picked.push_back(r);
    } else {
      seen.insert(j);
      picked.push_back(j);
    }
  }
  return picked;
}

// Indices of the `count` best keys; `better(a, b)` orders keys, ties keep
// the smaller index.
template <class Key, class Better>
std::vector<std::size_t> top_by(const std::vector<Key>& keys, std::size_t count,
                                Better better) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(count),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (better(keys[a], keys[b])) return true;
                      if (better(keys[b], keys[a])) return false;
                      return a < b;
                    });
  order.resize(count);
  return order;
}

}  // namespace

BlockChoice choose_blocks(const space::BlockGrid& grid,
                          const AcquisitionConfig& config, std::size_t t,
                          double gamma, Rng& rng) {
  const std::size_t total = grid.block_total();
  const std::size_t b = config.blocks_per_epoch;
  if (b > total)
    throw ConfigError("blocks_per_epoch = " + std::to_string(b) +
                      " exceeds the " + std::to_string(total) +
                      " blocks of the grid");
  BlockChoice choice;
  choice.exploration = is_exploration_epoch(t, config.exploration_period);
  if (choice.exploration &&
      config.exploration_mode == ExplorationMode::random_blocks) {
    choice.blocks = distinct_uniform(b, total, rng);
    return choice;
  }
  if (choice.exploration) {
    std::vector<std::size_t> counts(total, 0);
    for (const auto& [linear, rec] : grid.populated())
      counts[linear] = rec.instance_count();
    choice.blocks = top_by(counts, b, std::less<>());
    return choice;
  }
  std::vector<double> scores(total, 0.0);
  for (const auto& [linear, rec] : grid.populated())
    scores[linear] = space::block_score(rec, t, gamma);
  choice.blocks = top_by(scores, b, std::greater<>());
  return choice;
}

std::vector<Candidate> generate_candidates(std::span<const std::size_t> blocks,
                                           std::size_t m, std::size_t n,
                                           std::size_t p, Rng& rng) {
  std::vector<Candidate> out;
  out.reserve(blocks.size() * m);
  for (std::size_t linear : blocks) {
    const auto idx = space::block_from_linear(linear, n, p);
    for (auto& x : space::sample_in_block(idx, p, m, rng))
      out.push_back({std::move(x), linear});
  }
  return out;
}

InstanceChoice choose_instances(std::span<const double> uncertainties,
                                std::size_t k, double epsilon,
                                EpsilonScope scope, Rng& rng) {
  const std::size_t pool = uncertainties.size();
  if (k > pool)
    throw ConfigError("choose_instances: k = " + std::to_string(k) +
                      " exceeds the " + std::to_string(pool) + " candidates");
  InstanceChoice choice;
  if (scope == EpsilonScope::per_epoch) {
    if (rng.bernoulli(epsilon)) {
      choice.indices = distinct_uniform(k, pool, rng);
      choice.random.assign(k, true);
    } else {
      std::vector<double> u(uncertainties.begin(), uncertainties.end());
      choice.indices = top_by(u, k, std::greater<>());
      choice.random.assign(k, false);
    }
    return choice;
  }
  std::vector<std::size_t> remaining(pool);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  for (std::size_t slot = 0; slot < k; ++slot) {
    std::size_t pos = 0;
    const bool random = rng.bernoulli(epsilon);
    if (random) {
      pos = rng.index(remaining.size());
    } else {
      for (std::size_t i = 1; i < remaining.size(); ++i)
        if (uncertainties[remaining[i]] > uncertainties[remaining[pos]]) pos = i;
    }
    choice.indices.push_back(remaining[pos]);
    choice.random.push_back(random);
    remaining.erase(remaining.begin() + static_cast<long>(pos));
  }
  return choice;
}

}  // namespace qbc::acquisition
