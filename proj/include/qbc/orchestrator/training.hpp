// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "qbc/nn/network.hpp"
#include "qbc/nn/optim.hpp"
#include "qbc/orchestrator/dataset.hpp"
#include "qbc/rng.hpp"

namespace qbc::orchestrator {

/// One member of the committee: weights and moments, its private mini-batch
/// stream and the mean loss of every step taken.
struct Member {
  nn::ModelState state;
  Rng rng{0};
  std::vector<double> loss_history;
};

/// `steps` Adam steps of MSE on `data`. Sets no larger than `batch_size` are
/// used whole; otherwise each step draws `batch_size` distinct rows from the
/// member's stream. NumericError on a non-finite loss.
void train_member(const nn::Network& net, Member& member,
                  const LabeledSet& data, std::size_t steps,
                  std::size_t batch_size, const nn::OptimizerConfig& opt);

/// `epochs` shuffled passes over `data` in mini-batches. After each pass
/// `on_epoch(pass_index)` is called.
template <typename Callback>
void train_member_epochs(const nn::Network& net, Member& member,
                         const LabeledSet& data, std::size_t epochs,
                         std::size_t batch_size,
                         const nn::OptimizerConfig& opt, Callback on_epoch);

/// Mean over instances of the per-instance MSE. Zero for an empty set.
double evaluate(const nn::Network& net, const nn::ModelState& state,
                const LabeledSet& data);

/// Predictions for every row of `x`, computed in chunks.
nn::Array predict(const nn::Network& net, const nn::ModelState& state,
                  const nn::Array& x);

/// Runs `fn(i)` for i in [0, count) on up to `threads` threads. With one
/// thread the calls happen in order on the caller's thread. The first
/// exception is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn);

// ---- implementation details ---------------------------------------------------

void shuffled_pass_steps(const nn::Network& net, Member& member,
                         const LabeledSet& data, std::size_t batch_size,
                         const nn::OptimizerConfig& opt);

void run_parallel(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

template <typename Callback>
void train_member_epochs(const nn::Network& net, Member& member,
                         const LabeledSet& data, std::size_t epochs,
                         std::size_t batch_size,
                         const nn::OptimizerConfig& opt, Callback on_epoch) {
  for (std::size_t e = 0; e < epochs; ++e) {
    shuffled_pass_steps(net, member, data, batch_size, opt);
    on_epoch(e);
  }
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  run_parallel(count, threads, std::function<void(std::size_t)>(fn));
}

}  // namespace qbc::orchestrator
