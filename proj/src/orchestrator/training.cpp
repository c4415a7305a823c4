// SPDX-License-Identifier: Apache-2.0
#include "qbc/orchestrator/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "qbc/errors.hpp"

namespace qbc::orchestrator {
namespace {

double step_on(const nn::Network& net, Member& member, const LabeledSet& batch,
               const nn::OptimizerConfig& opt, nn::Gradients& grads,
               nn::Tape& tape) {
  for (auto& g : grads) g.fill(0.0);
  const double loss = net.accumulate_mse_gradient(member.state, batch.x,
                                                  batch.y, 1.0, grads, tape);
  if (!std::isfinite(loss))
    throw NumericError("non-finite training loss at optimizer step " +
                       std::to_string(member.state.step + 1) + " (batch of " +
                       std::to_string(batch.size()) + ")");
  nn::adam_step(member.state, grads, opt);
  member.loss_history.push_back(loss);
  return loss;
}

}  // namespace

void train_member(const nn::Network& net, Member& member,
                  const LabeledSet& data, std::size_t steps,
                  std::size_t batch_size, const nn::OptimizerConfig& opt) {
  if (steps == 0) return;
  if (data.empty()) throw ConfigError("training on an empty instance set");
  nn::Gradients grads = net.zero_gradients();
  nn::Tape tape;
  const std::size_t n = data.size();
  if (n <= batch_size) {
    for (std::size_t s = 0; s < steps; ++s)
      step_on(net, member, data, opt, grads, tape);
    return;
  }
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> rows(batch_size);
  for (std::size_t s = 0; s < steps; ++s) {
    // Partial Fisher-Yates: the first batch_size slots are a uniform sample
    // without replacement.
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch_size; ++i) {
      const std::size_t j = i + member.rng.index(n - i);
      std::swap(order[i], order[j]);
      rows[i] = order[i];
    }
    step_on(net, member, gather(data, rows), opt, grads, tape);
  }
}

void shuffled_pass_steps(const nn::Network& net, Member& member,
                         const LabeledSet& data, std::size_t batch_size,
                         const nn::OptimizerConfig& opt) {
  if (data.empty()) throw ConfigError("training on an empty instance set");
  nn::Gradients grads = net.zero_gradients();
  nn::Tape tape;
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[member.rng.index(i)]);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    const std::span<const std::size_t> rows(order.data() + start,
                                            stop - start);
    step_on(net, member, gather(data, rows), opt, grads, tape);
  }
}

nn::Array predict(const nn::Network& net, const nn::ModelState& state,
                  const nn::Array& x) {
  constexpr std::size_t kChunk = 64;
  const std::size_t rows = x.extent(0);
  const std::size_t n = x.extent(1);
  const std::size_t len = net.output_length();
  nn::Array out({rows, len});
  for (std::size_t start = 0; start < rows; start += kChunk) {
    const std::size_t count = std::min(kChunk, rows - start);
    nn::Array chunk({count, n});
    std::copy_n(x.row(start), count * n, chunk.data());
    const nn::Array y = net.forward_batch(state, chunk);
    std::copy_n(y.data(), count * len, out.row(start));
  }
  return out;
}

double evaluate(const nn::Network& net, const nn::ModelState& state,
                const LabeledSet& data) {
  if (data.empty()) return 0.0;
  const nn::Array pred = predict(net, state, data.x);
  const std::size_t rows = data.size();
  const std::size_t len = data.y.extent(1);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* p = pred.row(i);
    const double* y = data.y.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < len; ++j) s += (p[j] - y[j]) * (p[j] - y[j]);
    total += s / static_cast<double>(len);
  }
  return total / static_cast<double>(rows);
}

void run_parallel(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t width = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(width);
  for (std::size_t w = 0; w < width; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += width) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qbc::orchestrator
