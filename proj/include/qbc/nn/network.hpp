// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbc/nn/array.hpp"
#include "qbc/nn/layers.hpp"

namespace qbc::nn {

/// Declarative layer schedule: dense stack -> reshape to
/// (initial_channels x initial_length) -> ResConv modules -> attention.
struct NetworkConfig {
  std::string preset = "custom";
  std::size_t input_dim = 3;
  /// Widths of the dense layers; the last equals
  /// initial_channels * initial_length.
  std::vector<std::size_t> dense_sizes;
  std::size_t initial_channels = 32;
  std::size_t initial_length = 4;
  std::vector<ResConvSpec> resconv;
  std::size_t attention_in_channels = 15;

  /// Length of the spectrum produced by the chained layer shapes.
  std::size_t output_length() const;

  /// Shape-chain and split checks; throws ConfigError / DimensionError.
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Transposed convs k=2, s=1 with p=0 for modules 1-4 and p=1 for 5-6:
/// 4 -> 5 -> 6 -> 7 -> 8 -> 7 -> 6.
NetworkConfig paper_literal_preset(std::size_t input_dim);

/// Stride-2 upsampling in modules 1-4 (4 -> 64), then a p=0/p=1 pair
/// (64 -> 65 -> 64).
NetworkConfig desk64_preset(std::size_t input_dim);

/// Looks up "paper-literal" or "desk-64".
NetworkConfig preset_by_name(const std::string& name, std::size_t input_dim);

/// Trainable parameters plus Adam moments.
struct ModelState {
  std::vector<Array> params;
  std::vector<Array> m;
  std::vector<Array> v;
  std::uint64_t step = 0;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

using Gradients = std::vector<Array>;

/// Activations recorded by a forward pass for the matching backward pass.
struct Tape {
  std::vector<Array> dense_io;  // input, then each layer output (B x width)
  std::vector<ResConvCache> resconv;
  AttentionCache attention;
};

/// Width factor of the initial weights of each ResConv branch's last conv.
inline constexpr double kResidualInitScale = 0.1;

class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const noexcept { return config_; }
  const std::vector<Shape>& parameter_shapes() const noexcept {
    return shapes_;
  }
  std::size_t parameter_count() const noexcept;
  std::size_t output_length() const noexcept { return output_length_; }

  /// He-uniform weights, zero biases, alpha = 0, beta = 1, zero moments.
  /// The second conv of every ResConv branch is drawn kResidualInitScale
  /// times narrower so each module starts close to relu(u).
  ModelState initialize(std::uint64_t seed) const;

  /// Single instance.
  std::vector<double> forward(const ModelState& state,
                              std::span<const double> x) const;

  /// Batch of instances, one per row of `x` (B x input_dim). Returns
  /// (B x output_length).
  Array forward_batch(const ModelState& state, const Array& x) const;
  Array forward_batch(const ModelState& state, const Array& x,
                      Tape& tape) const;

  /// Accumulates dLoss/dparams into `grads` given dLoss/doutput (B x L).
  void backward(const ModelState& state, const Tape& tape, const Array& dy,
                Gradients& grads) const;

  Gradients zero_gradients() const;

  /// Adds the gradient of scale * (mean over rows of mse(forward(x), y)) to
  /// `grads` and returns the unscaled mean loss.
  double accumulate_mse_gradient(const ModelState& state, const Array& x,
                                 const Array& y, double scale,
                                 Gradients& grads, Tape& tape) const;

  /// Throws DimensionError naming the first parameter whose shape is off.
  void check_state(const ModelState& state) const;

 private:
  NetworkConfig config_;
  std::vector<Shape> shapes_;
  std::size_t output_length_ = 0;
  std::size_t resconv_offset_ = 0;
  std::size_t attention_offset_ = 0;
};

/// Gradients of mse(model(x), y) for one instance.
Gradients mse_gradients(const Network& net, const ModelState& state,
                        std::span<const double> x, std::span<const double> y);

}  // namespace qbc::nn
