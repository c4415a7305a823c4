// SPDX-License-Identifier: Apache-2.0
#pragma once

// Forward and backward passes of the individual layer types, batched.
// Activations carry the batch on axis 0: dense tensors are (B x N), conv
// tensors (B x C x L). Backward functions accumulate (+=) into gradient arrays
// so callers zero them first.

#include <cstddef>
#include <span>

#include "qbc/nn/array.hpp"

namespace qbc::nn {

enum class Activation { linear, relu };

// ---- fully connected -------------------------------------------------------

/// y = act(x W^T + b). W is (out x in), b is (out), x is (B x in).
Array dense_forward(const Array& w, const Array& b, const Array& x,
                    Activation act);

/// `y` is the forward output (post-activation). `dx` may be null.
void dense_backward(const Array& w, const Array& x, const Array& y,
                    Activation act, const Array& dy, Array& dw, Array& db,
                    Array* dx);

// ---- 1-D convolution -------------------------------------------------------

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                 std::size_t stride, std::size_t padding);

/// x is (B x Cin x L), w is (Cout x Cin x k), b is (Cout). Zero padding on
/// both ends. No activation.
Array conv1d_forward(const Array& x, const Array& w, const Array& b,
                     std::size_t stride, std::size_t padding);

void conv1d_backward(const Array& x, const Array& w, std::size_t stride,
                     std::size_t padding, const Array& dout, Array& dw,
                     Array& db, Array* dx);

// ---- 1-D transposed convolution ---------------------------------------------

std::size_t convtranspose1d_output_length(std::size_t length,
                                          std::size_t kernel,
                                          std::size_t stride,
                                          std::size_t padding);

/// x is (B x Cin x L), w is (Cin x Cout x k), b is (Cout). Output length
/// (L - 1) * stride - 2 * padding + k. No activation.
Array convtranspose1d_forward(const Array& x, const Array& w, const Array& b,
                              std::size_t stride, std::size_t padding);

void convtranspose1d_backward(const Array& x, const Array& w,
                              std::size_t stride, std::size_t padding,
                              const Array& dout, Array& dw, Array& db,
                              Array* dx);

// ---- ResConv module ---------------------------------------------------------

struct ResConvSpec {
  std::size_t kernel = 2;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t out_channels = 32;
  /// Applied to the sum of the skip and conv paths.
  Activation output = Activation::relu;

  friend bool operator==(const ResConvSpec&, const ResConvSpec&) = default;
};

/// Parameter order: convT w, convT b, conv1 w, conv1 b, conv2 w, conv2 b.
inline constexpr std::size_t kResConvParamCount = 6;

struct ResConvCache {
  Array input;
  Array u;   // transposed-conv output
  Array a1;  // first conv, pre-activation
  Array r1;  // relu(a1)
  Array out; // act(u + conv2(r1))
};

/// u = convT(x); out = act(u + conv2(relu(conv1(u)))), where both convs are
/// k=3, s=1, p=1 and channel preserving and act is `spec.output`.
Array resconv_forward(const ResConvSpec& spec, std::span<const Array> params,
                      const Array& x, ResConvCache* cache);

void resconv_backward(const ResConvSpec& spec, std::span<const Array> params,
                      const ResConvCache& cache, const Array& dout,
                      std::span<Array> grads, Array* dx);

// ---- attention --------------------------------------------------------------

/// Parameter order: h_w (1x1x1), h_b (1), f_w (d x d x 1), f_b (d),
/// g_w (d x d x 1), g_b (d), alpha (1), beta (1).
inline constexpr std::size_t kAttentionParamCount = 8;

struct AttentionCache {
  Array input;  // B x (1 + 2d) x L
  Array h;      // B x 1 x L
  Array f;      // B x d x L
  Array g;      // B x d x L
  Array map;    // B x L x L, row-wise softmax of f^T g
  Array mixed;  // B x 1 x L, h . map
};

/// Channel 0 feeds h, channels [1, 1+d) feed f and [1+d, 1+2d) feed g.
/// Returns (B x 1 x L): alpha * (h . A) + beta * h with A = softmax_rows(f^T g).
Array attention_forward(std::span<const Array> params, const Array& x,
                        AttentionCache* cache);

void attention_backward(std::span<const Array> params,
                        const AttentionCache& cache, const Array& dout,
                        std::span<Array> grads, Array* dx);

/// Splits `in_channels` into (h, f, g) widths. ConfigError when the remainder
/// after h is odd or empty.
std::size_t attention_branch_width(std::size_t in_channels);

}  // namespace qbc::nn
