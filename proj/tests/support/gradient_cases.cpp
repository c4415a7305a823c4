// SPDX-License-Identifier: Apache-2.0
#include "gradient_cases.hpp"

#include <functional>
#include <vector>

#include "qbc/nn/layers.hpp"
#include "qbc/rng.hpp"

namespace qbc::testing {
namespace {

using nn::Array;

Array random_array(nn::Shape shape, Rng& rng, double lo = -1.0,
                   double hi = 1.0) {
  Array a(std::move(shape));
  for (auto& v : a.values()) v = rng.uniform(lo, hi);
  return a;
}

double weighted_sum(const Array& out, const Array& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * c[i];
  return s;
}

// Gradients below this are compared on an absolute scale of 1e-4 * floor,
// which sits above the ~1e-11 round-off of a central difference at h = 1e-5.
constexpr double kGradientFloor = 1e-6;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.index(hi - lo + 1);
}

CaseReport check(const std::function<double()>& loss,
                 std::vector<Array*> inputs, const std::vector<Array>& grads,
                 std::string description) {
  CaseReport r;
  r.report = nn::check_gradients(loss, inputs, grads, 1e-5, kGradientFloor);
  r.description = std::move(description);
  return r;
}

CaseReport dense_case(Rng& rng) {
  const std::size_t nb = pick(rng, 1, 3), in = pick(rng, 1, 6),
                    out = pick(rng, 1, 6);
  const auto act = rng.bernoulli(0.5) ? nn::Activation::relu
                                      : nn::Activation::linear;
  Array w = random_array({out, in}, rng), b = random_array({out}, rng);
  Array x = random_array({nb, in}, rng);
  const Array c = random_array({nb, out}, rng);
  auto loss = [&] { return weighted_sum(nn::dense_forward(w, b, x, act), c); };
  const Array y = nn::dense_forward(w, b, x, act);
  Array dw(w.shape()), db(b.shape()), dx(x.shape());
  nn::dense_backward(w, x, y, act, c, dw, db, &dx);
  return check(loss, {&w, &b, &x}, {dw, db, dx},
               "B=" + std::to_string(nb) + " in=" + std::to_string(in) +
                   " out=" + std::to_string(out) +
                   (act == nn::Activation::relu ? " relu" : " linear"));
}

CaseReport conv_case(Rng& rng) {
  const std::size_t nb = pick(rng, 1, 3), cin = pick(rng, 1, 4),
                    cout = pick(rng, 1, 4), k = pick(rng, 1, 3),
                    s = pick(rng, 1, 2), p = pick(rng, 0, 1),
                    len = pick(rng, 4, 9);
  Array w = random_array({cout, cin, k}, rng), b = random_array({cout}, rng);
  Array x = random_array({nb, cin, len}, rng);
  const Array probe = nn::conv1d_forward(x, w, b, s, p);
  const Array c = random_array(probe.shape(), rng);
  auto loss = [&] { return weighted_sum(nn::conv1d_forward(x, w, b, s, p), c); };
  Array dw(w.shape()), db(b.shape()), dx(x.shape());
  nn::conv1d_backward(x, w, s, p, c, dw, db, &dx);
  return check(loss, {&w, &b, &x}, {dw, db, dx},
               "B=" + std::to_string(nb) + " cin=" + std::to_string(cin) +
                   " cout=" + std::to_string(cout) + " k=" +
                   std::to_string(k) + " s=" + std::to_string(s) + " p=" +
                   std::to_string(p) + " L=" + std::to_string(len));
}

CaseReport convt_case(Rng& rng) {
  const std::size_t nb = pick(rng, 1, 3), cin = pick(rng, 1, 4),
                    cout = pick(rng, 1, 4), k = pick(rng, 1, 3),
                    s = pick(rng, 1, 3), len = pick(rng, 2, 7);
  // Keep the output non-empty: (L - 1) s + k - 2p >= 1.
  std::size_t p = pick(rng, 0, 1);
  if ((len - 1) * s + k <= 2 * p) p = 0;
  Array w = random_array({cin, cout, k}, rng), b = random_array({cout}, rng);
  Array x = random_array({nb, cin, len}, rng);
  const Array probe = nn::convtranspose1d_forward(x, w, b, s, p);
  const Array c = random_array(probe.shape(), rng);
  auto loss = [&] {
    return weighted_sum(nn::convtranspose1d_forward(x, w, b, s, p), c);
  };
  Array dw(w.shape()), db(b.shape()), dx(x.shape());
  nn::convtranspose1d_backward(x, w, s, p, c, dw, db, &dx);
  return check(loss, {&w, &b, &x}, {dw, db, dx},
               "B=" + std::to_string(nb) + " cin=" + std::to_string(cin) +
                   " cout=" + std::to_string(cout) + " k=" +
                   std::to_string(k) + " s=" + std::to_string(s) + " p=" +
                   std::to_string(p) + " L=" + std::to_string(len));
}

CaseReport resconv_case(Rng& rng) {
  nn::ResConvSpec spec;
  spec.kernel = 2;
  spec.stride = pick(rng, 1, 2);
  spec.padding = spec.stride == 1 ? pick(rng, 0, 1) : 0;
  spec.out_channels = pick(rng, 2, 4);
  spec.output = rng.bernoulli(0.5) ? nn::Activation::relu
                                   : nn::Activation::linear;
  const std::size_t nb = pick(rng, 1, 3), cin = pick(rng, 2, 4),
                    len = pick(rng, 3, 6), co = spec.out_channels;
  std::vector<Array> params{random_array({cin, co, 2}, rng),
                            random_array({co}, rng, -0.2, 0.2),
                            random_array({co, co, 3}, rng),
                            random_array({co}, rng, -0.2, 0.2),
                            random_array({co, co, 3}, rng),
                            random_array({co}, rng, -0.2, 0.2)};
  Array x = random_array({nb, cin, len}, rng);
  nn::ResConvCache cache;
  const Array probe = nn::resconv_forward(spec, params, x, &cache);
  const Array c = random_array(probe.shape(), rng);
  auto loss = [&] {
    return weighted_sum(nn::resconv_forward(spec, params, x, nullptr), c);
  };
  std::vector<Array> grads;
  for (const auto& p : params) grads.emplace_back(p.shape());
  Array dx(x.shape());
  nn::resconv_backward(spec, params, cache, c, grads, &dx);
  std::vector<Array*> inputs;
  for (auto& p : params) inputs.push_back(&p);
  inputs.push_back(&x);
  grads.push_back(dx);
  return check(loss, inputs, grads,
               "B=" + std::to_string(nb) + " cin=" + std::to_string(cin) +
                   " cout=" + std::to_string(co) + " s=" +
                   std::to_string(spec.stride) + " p=" +
                   std::to_string(spec.padding) + " L=" + std::to_string(len) +
                   (spec.output == nn::Activation::relu ? " relu" : " linear"));
}

CaseReport attention_case(Rng& rng) {
  const std::size_t d = pick(rng, 1, 3), nb = pick(rng, 1, 3),
                    len = pick(rng, 3, 7);
  std::vector<Array> params{random_array({1, 1, 1}, rng),
                            random_array({1}, rng),
                            random_array({d, d, 1}, rng),
                            random_array({d}, rng),
                            random_array({d, d, 1}, rng),
                            random_array({d}, rng),
                            random_array({1}, rng, 0.2, 1.0),
                            random_array({1}, rng, 0.2, 1.0)};
  Array x = random_array({nb, 1 + 2 * d, len}, rng);
  nn::AttentionCache cache;
  const Array probe = nn::attention_forward(params, x, &cache);
  const Array c = random_array(probe.shape(), rng);
  auto loss = [&] {
    return weighted_sum(nn::attention_forward(params, x, nullptr), c);
  };
  std::vector<Array> grads;
  for (const auto& p : params) grads.emplace_back(p.shape());
  Array dx(x.shape());
  nn::attention_backward(params, cache, c, grads, &dx);
  std::vector<Array*> inputs;
  for (auto& p : params) inputs.push_back(&p);
  inputs.push_back(&x);
  grads.push_back(dx);
  return check(loss, inputs, grads,
               "B=" + std::to_string(nb) + " d=" + std::to_string(d) +
                   " L=" + std::to_string(len));
}

CaseReport model_case(Rng& rng, std::uint64_t seed) {
  const nn::Network net(tiny_network_config());
  nn::ModelState st = net.initialize(seed);
  // Fresh models have zero biases, which leaves dead units at exactly zero
  // and so on the relu kink; nonzero biases keep the check off the kinks.
  for (std::size_t i = 1; i < st.params.size() - 2; ++i)
    if (st.params[i].rank() == 1)
      for (auto& v : st.params[i].values()) v = rng.uniform(-0.2, 0.2);
  // Move alpha off zero so the attention map takes part.
  st.params[st.params.size() - 2][0] = rng.uniform(0.2, 1.0);
  const std::size_t nb = pick(rng, 1, 3);
  const Array x = random_array({nb, 2}, rng, 0.0, 1.0);
  const Array y = random_array({nb, net.output_length()}, rng, 0.0, 1.0);
  auto loss = [&] {
    nn::Tape tape;
    auto g = net.zero_gradients();
    return net.accumulate_mse_gradient(st, x, y, 1.0, g, tape);
  };
  nn::Tape tape;
  auto grads = net.zero_gradients();
  net.accumulate_mse_gradient(st, x, y, 1.0, grads, tape);
  std::vector<Array*> inputs;
  for (auto& p : st.params) inputs.push_back(&p);
  return check(loss, inputs, grads, "tiny network, B=" + std::to_string(nb));
}

}  // namespace

std::string to_string(LayerCase c) {
  switch (c) {
    case LayerCase::dense: return "dense";
    case LayerCase::conv1d: return "conv1d";
    case LayerCase::convtranspose1d: return "convtranspose1d";
    case LayerCase::resconv: return "resconv";
    case LayerCase::attention: return "attention";
    case LayerCase::full_model: return "full model";
  }
  return "?";
}

nn::NetworkConfig tiny_network_config() {
  nn::NetworkConfig c;
  c.preset = "tiny";
  c.input_dim = 2;
  c.dense_sizes = {6, 8};
  c.initial_channels = 4;
  c.initial_length = 2;
  c.resconv = {nn::ResConvSpec{2, 2, 0, 4},
               nn::ResConvSpec{2, 1, 0, 5, nn::Activation::linear}};
  c.attention_in_channels = 5;
  return c;
}

CaseReport gradient_case(LayerCase c, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c) + 1));
  switch (c) {
    case LayerCase::dense: return dense_case(rng);
    case LayerCase::conv1d: return conv_case(rng);
    case LayerCase::convtranspose1d: return convt_case(rng);
    case LayerCase::resconv: return resconv_case(rng);
    case LayerCase::attention: return attention_case(rng);
    case LayerCase::full_model: return model_case(rng, seed);
  }
  return {};
}

}  // namespace qbc::testing
