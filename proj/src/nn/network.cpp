// SPDX-License-Identifier: Apache-2.0
#include "qbc/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "qbc/errors.hpp"
#include "qbc/rng.hpp"

namespace qbc::nn {

std::size_t NetworkConfig::output_length() const {
  std::size_t len = initial_length;
  for (const auto& m : resconv) {
    len = convtranspose1d_output_length(len, m.kernel, m.stride, m.padding);
    len = conv1d_output_length(len, 3, 1, 1);
  }
  return len;
}

void NetworkConfig::validate() const {
  if (input_dim < 1) throw ConfigError("network: input_dim must be >= 1");
  if (dense_sizes.empty())
    throw ConfigError("network: at least one dense layer is required");
  for (auto s : dense_sizes)
    if (s < 1) throw ConfigError("network: dense widths must be >= 1");
  if (initial_channels < 1 || initial_length < 1)
    throw ConfigError("network: initial channels and length must be >= 1");
  if (dense_sizes.back() != initial_channels * initial_length)
    throw DimensionError(
        "network: last dense width " + std::to_string(dense_sizes.back()) +
        " != initial_channels x initial_length = " +
        std::to_string(initial_channels * initial_length));
  if (resconv.empty())
    throw ConfigError("network: at least one ResConv module is required");
  for (const auto& m : resconv)
    if (m.out_channels < 1)
      throw ConfigError("network: ResConv output channels must be >= 1");
  if (resconv.back().out_channels != attention_in_channels)
    throw DimensionError("network: last ResConv emits " +
                         std::to_string(resconv.back().out_channels) +
                         " channels but attention expects " +
                         std::to_string(attention_in_channels));
  attention_branch_width(attention_in_channels);
  (void)output_length();  // throws on an impossible shape chain
}

namespace {

std::vector<ResConvSpec> taper(std::size_t stride, std::size_t tail_padding5,
                               std::size_t tail_padding6) {
  const std::size_t channels[6] = {32, 32, 28, 24, 20, 15};
  std::vector<ResConvSpec> s;
  for (std::size_t i = 0; i < 4; ++i) s.push_back({2, stride, 0, channels[i]});
  s.push_back({2, 1, tail_padding5, channels[4]});
  // The last module feeds the linear output stage directly.
  s.push_back({2, 1, tail_padding6, channels[5], Activation::linear});
  return s;
}

}  // namespace

NetworkConfig paper_literal_preset(std::size_t input_dim) {
  NetworkConfig c;
  c.preset = "paper-literal";
  c.input_dim = input_dim;
  c.dense_sizes = {64, 128};
  c.initial_channels = 32;
  c.initial_length = 4;
  c.resconv = taper(1, 1, 1);
  c.attention_in_channels = 15;
  return c;
}

NetworkConfig desk64_preset(std::size_t input_dim) {
  NetworkConfig c = paper_literal_preset(input_dim);
  c.preset = "desk-64";
  c.resconv = taper(2, 0, 1);
  return c;
}

NetworkConfig preset_by_name(const std::string& name, std::size_t input_dim) {
  if (name == "paper-literal") return paper_literal_preset(input_dim);
  if (name == "desk-64") return desk64_preset(input_dim);
  throw ConfigError("unknown network preset '" + name +
                    "' (expected paper-literal or desk-64)");
}

// ---- Network ------------------------------------------------------------------

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  output_length_ = config_.output_length();

  std::size_t prev = config_.input_dim;
  for (auto width : config_.dense_sizes) {
    shapes_.push_back({width, prev});
    shapes_.push_back({width});
    prev = width;
  }
  resconv_offset_ = shapes_.size();
  std::size_t cin = config_.initial_channels;
  for (const auto& m : config_.resconv) {
    const std::size_t c = m.out_channels;
    shapes_.push_back({cin, c, m.kernel});
    shapes_.push_back({c});
    shapes_.push_back({c, c, 3});
    shapes_.push_back({c});
    shapes_.push_back({c, c, 3});
    shapes_.push_back({c});
    cin = c;
  }
  attention_offset_ = shapes_.size();
  const std::size_t d = attention_branch_width(config_.attention_in_channels);
  shapes_.push_back({1, 1, 1});
  shapes_.push_back({1});
  shapes_.push_back({d, d, 1});
  shapes_.push_back({d});
  shapes_.push_back({d, d, 1});
  shapes_.push_back({d});
  shapes_.push_back({1});
  shapes_.push_back({1});
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : shapes_) n += shape_volume(s);
  return n;
}

ModelState Network::initialize(std::uint64_t seed) const {
  Rng rng(seed);
  ModelState st;
  st.params.reserve(shapes_.size());
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const Shape& s = shapes_[i];
    Array a(s);
    if (s.size() >= 2) {
      std::size_t fan_in = 0;
      if (i < resconv_offset_) {
        fan_in = s[1];
      } else if (i < attention_offset_ && (i - resconv_offset_) % 6 == 0) {
        const auto& m = config_.resconv[(i - resconv_offset_) / 6];
        fan_in = std::max<std::size_t>(1, s[0] * s[2] / m.stride);
      } else {
        fan_in = s[1] * s[2];
      }
      double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      if (i >= resconv_offset_ && i < attention_offset_ &&
          (i - resconv_offset_) % 6 == 4)
        bound *= kResidualInitScale;
      for (auto& v : a.values()) v = rng.uniform(-bound, bound);
    }
    st.params.push_back(std::move(a));
  }
  st.params[attention_offset_ + 6][0] = 0.0;  // alpha
  st.params[attention_offset_ + 7][0] = 1.0;  // beta
  for (const auto& s : shapes_) {
    st.m.emplace_back(s);
    st.v.emplace_back(s);
  }
  return st;
}

void Network::check_state(const ModelState& state) const {
  if (state.params.size() != shapes_.size())
    throw DimensionError("model state has " +
                         std::to_string(state.params.size()) +
                         " parameter arrays, network expects " +
                         std::to_string(shapes_.size()));
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    if (state.params[i].shape() == shapes_[i]) continue;
    std::string where;
    if (i < resconv_offset_)
      where = "dense layer " + std::to_string(i / 2);
    else if (i < attention_offset_)
      where = "ResConv module " + std::to_string((i - resconv_offset_) / 6);
    else
      where = "attention layer";
    throw DimensionError(where + ": parameter " + std::to_string(i) +
                         " has shape " +
                         shape_to_string(state.params[i].shape()) +
                         ", expected " + shape_to_string(shapes_[i]));
  }
}

std::vector<double> Network::forward(const ModelState& state,
                                     std::span<const double> x) const {
  Array xb({1, x.size()}, std::vector<double>(x.begin(), x.end()));
  return forward_batch(state, xb).vector();
}

Array Network::forward_batch(const ModelState& state, const Array& x) const {
  Tape tape;
  return forward_batch(state, x, tape);
}

Array Network::forward_batch(const ModelState& state, const Array& x,
                             Tape& tape) const {
  check_state(state);
  if (x.rank() != 2 || x.extent(1) != config_.input_dim || x.extent(0) == 0)
    throw DimensionError("network input has shape " +
                         shape_to_string(x.shape()) + ", expected (B, " +
                         std::to_string(config_.input_dim) + ") with B >= 1");
  const std::size_t nb = x.extent(0);
  const auto& p = state.params;
  const std::size_t n_dense = config_.dense_sizes.size();

  tape.dense_io.resize(n_dense + 1);
  tape.dense_io[0] = x;
  for (std::size_t i = 0; i < n_dense; ++i)
    tape.dense_io[i + 1] = dense_forward(p[2 * i], p[2 * i + 1],
                                         tape.dense_io[i], Activation::relu);

  Array cur = tape.dense_io[n_dense];
  cur.reshape({nb, config_.initial_channels, config_.initial_length});
  tape.resconv.resize(config_.resconv.size());
  const std::span<const Array> all(p);
  for (std::size_t r = 0; r < config_.resconv.size(); ++r)
    cur = resconv_forward(
        config_.resconv[r],
        all.subspan(resconv_offset_ + r * kResConvParamCount,
                    kResConvParamCount),
        cur, &tape.resconv[r]);

  Array out = attention_forward(
      all.subspan(attention_offset_, kAttentionParamCount), cur,
      &tape.attention);
  out.reshape({nb, output_length_});
  return out;
}

void Network::backward(const ModelState& state, const Tape& tape,
                       const Array& dy, Gradients& grads) const {
  const std::size_t nb = tape.dense_io.empty() ? 0 : tape.dense_io[0].extent(0);
  if (dy.rank() != 2 || dy.extent(0) != nb || dy.extent(1) != output_length_)
    throw DimensionError("output gradient has shape " +
                         shape_to_string(dy.shape()) + ", expected (" +
                         std::to_string(nb) + ", " +
                         std::to_string(output_length_) + ")");
  const std::span<const Array> p(state.params);
  const std::span<Array> g(grads);

  Array dout = dy;
  dout.reshape({nb, 1, output_length_});
  Array dcur(tape.attention.input.shape());
  attention_backward(p.subspan(attention_offset_, kAttentionParamCount),
                     tape.attention, dout,
                     g.subspan(attention_offset_, kAttentionParamCount), &dcur);

  for (std::size_t r = config_.resconv.size(); r-- > 0;) {
    const std::size_t off = resconv_offset_ + r * kResConvParamCount;
    Array dprev(tape.resconv[r].input.shape());
    resconv_backward(config_.resconv[r], p.subspan(off, kResConvParamCount),
                     tape.resconv[r], dcur, g.subspan(off, kResConvParamCount),
                     &dprev);
    dcur = std::move(dprev);
  }

  Array dnext = std::move(dcur);
  dnext.reshape({nb, config_.dense_sizes.back()});
  for (std::size_t i = config_.dense_sizes.size(); i-- > 0;) {
    Array dx(tape.dense_io[i].shape());
    dense_backward(p[2 * i], tape.dense_io[i], tape.dense_io[i + 1],
                   Activation::relu, dnext, g[2 * i], g[2 * i + 1],
                   i > 0 ? &dx : nullptr);
    dnext = std::move(dx);
  }
}

Gradients Network::zero_gradients() const {
  Gradients g;
  g.reserve(shapes_.size());
  for (const auto& s : shapes_) g.emplace_back(s);
  return g;
}

double Network::accumulate_mse_gradient(const ModelState& state,
                                        const Array& x, const Array& y,
                                        double scale, Gradients& grads,
                                        Tape& tape) const {
  const Array pred = forward_batch(state, x, tape);
  if (y.shape() != pred.shape())
    throw DimensionError("target shape " + shape_to_string(y.shape()) +
                         " != model output shape " +
                         shape_to_string(pred.shape()));
  const double inv = 1.0 / static_cast<double>(pred.size());
  Array dy(pred.shape());
  double loss = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const double r = pred[j] - y[j];
    loss += r * r;
    dy[j] = 2.0 * r * inv * scale;
  }
  backward(state, tape, dy, grads);
  return loss * inv;
}

Gradients mse_gradients(const Network& net, const ModelState& state,
                        std::span<const double> x, std::span<const double> y) {
  Gradients g = net.zero_gradients();
  Tape tape;
  const Array xb({1, x.size()}, std::vector<double>(x.begin(), x.end()));
  const Array yb({1, y.size()}, std::vector<double>(y.begin(), y.end()));
  net.accumulate_mse_gradient(state, xb, yb, 1.0, g, tape);
  return g;
}

}  // namespace qbc::nn
