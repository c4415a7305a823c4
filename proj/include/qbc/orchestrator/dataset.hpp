// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qbc/nn/array.hpp"
#include "qbc/space/space.hpp"

namespace qbc::orchestrator {

/// How an instance entered the dataset.
enum class SelectionMode { seed, exploit, explore_random };

std::string to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& s);

struct Instance {
  std::size_t id = 0;
  std::size_t epoch = 0;         // algorithm epoch that added it (0 for seeds)
  space::Point x;                // unit cube
  space::Point x_physical;
  std::vector<double> y;
  double uncertainty = 0.0;      // disagreement at storage time
  std::size_t block = 0;         // linear block index
  SelectionMode mode = SelectionMode::seed;
  bool explore_epoch = false;    // blocks came from the exploration protocol

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Inputs and targets stacked row-wise for batched evaluation.
struct LabeledSet {
  nn::Array x;  // N x n
  nn::Array y;  // N x L

  std::size_t size() const { return x.rank() == 0 ? 0 : x.extent(0); }
  bool empty() const { return size() == 0; }
};

LabeledSet make_labeled_set(const std::vector<space::Point>& xs,
                            const std::vector<std::vector<double>>& ys);

/// Rows `rows` of the instances, in the given order.
LabeledSet gather(std::span<const Instance> instances,
                  std::span<const std::size_t> rows);

/// Rows `rows` of a labeled set.
LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> rows);

/// Rebuilds the block grid from logged instances.
space::BlockGrid rebuild_grid(std::span<const Instance> instances,
                              std::size_t n, std::size_t p);

}  // namespace qbc::orchestrator
