// SPDX-License-Identifier: Apache-2.0
#include "qbc/orchestrator/dataset.hpp"

#include <algorithm>

#include "qbc/errors.hpp"

namespace qbc::orchestrator {

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::seed: return "seed";
    case SelectionMode::exploit: return "exploit";
    case SelectionMode::explore_random: return "explore-random";
  }
  return "?";
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "seed") return SelectionMode::seed;
  if (s == "exploit") return SelectionMode::exploit;
  if (s == "explore-random") return SelectionMode::explore_random;
  throw FormatError("unknown selection mode '" + s + "'");
}

LabeledSet make_labeled_set(const std::vector<space::Point>& xs,
                            const std::vector<std::vector<double>>& ys) {
  if (xs.size() != ys.size())
    throw DimensionError("labeled set: input and target counts differ");
  if (xs.empty()) return {};
  const std::size_t n = xs.front().size();
  const std::size_t len = ys.front().size();
  LabeledSet set{nn::Array({xs.size(), n}), nn::Array({ys.size(), len})};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != n || ys[i].size() != len)
      throw DimensionError("labeled set: ragged rows");
    std::copy(xs[i].begin(), xs[i].end(), set.x.row(i));
    std::copy(ys[i].begin(), ys[i].end(), set.y.row(i));
  }
  return set;
}

LabeledSet gather(std::span<const Instance> instances,
                  std::span<const std::size_t> rows) {
  if (rows.empty()) return {};
  const std::size_t n = instances[rows[0]].x.size();
  const std::size_t len = instances[rows[0]].y.size();
  LabeledSet set{nn::Array({rows.size(), n}), nn::Array({rows.size(), len})};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Instance& in = instances[rows[i]];
    std::copy(in.x.begin(), in.x.end(), set.x.row(i));
    std::copy(in.y.begin(), in.y.end(), set.y.row(i));
  }
  return set;
}

LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> rows) {
  if (rows.empty()) return {};
  const std::size_t n = set.x.extent(1);
  const std::size_t len = set.y.extent(1);
  LabeledSet out{nn::Array({rows.size(), n}), nn::Array({rows.size(), len})};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(set.x.row(rows[i]), n, out.x.row(i));
    std::copy_n(set.y.row(rows[i]), len, out.y.row(i));
  }
  return out;
}

space::BlockGrid rebuild_grid(std::span<const Instance> instances,
                              std::size_t n, std::size_t p) {
  space::BlockGrid grid(n, p);
  for (const Instance& in : instances) {
    const std::size_t b = grid.record(in.x, in.uncertainty, in.epoch);
    if (b != in.block)
      throw FormatError("instance " + std::to_string(in.id) +
                        " is logged in block " + std::to_string(in.block) +
                        " but its x lies in block " + std::to_string(b));
  }
  return grid;
}

}  // namespace qbc::orchestrator
