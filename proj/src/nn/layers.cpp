// SPDX-License-Identifier: Apache-2.0
#include "qbc/nn/layers.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "qbc/errors.hpp"
#include "qbc/simd/kernels.hpp"

namespace qbc::nn {
namespace {

void require_rank(const Array& a, std::size_t rank, const char* what) {
  if (a.rank() != rank)
    throw DimensionError(std::string(what) + ": expected rank " +
                         std::to_string(rank) + ", got shape " +
                         shape_to_string(a.shape()));
}

// The convolution kernels work on one long row per channel. A batch
// (B x C x L) is laid out as B segments of `seg` columns each: sample b
// starts at b * seg + left, its entries `dilation` apart, zeros elsewhere.
// Segments are wide enough that a kernel window never mixes two samples in
// any output that is read back.
Array to_segments(const Array& x, std::size_t left, std::size_t seg,
                  std::size_t total, std::size_t dilation = 1) {
  const std::size_t nb = x.extent(0);
  const std::size_t c = x.extent(1);
  const std::size_t l = x.extent(2);
  Array out({c, total});
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t i = 0; i < c; ++i) {
      const double* src = x.data() + (b * c + i) * l;
      double* dst = out.row(i) + b * seg + left;
      if (dilation == 1) {
        std::copy_n(src, l, dst);
      } else {
        for (std::size_t t = 0; t < l; ++t) dst[t * dilation] = src[t];
      }
    }
  return out;
}

// Inverse of to_segments: dst[b][i][t] += cat[i][b * seg + offset + t * step].
void add_from_segments(const Array& cat, std::size_t seg, std::size_t offset,
                       std::size_t step, Array& dst) {
  const std::size_t nb = dst.extent(0);
  const std::size_t c = dst.extent(1);
  const std::size_t l = dst.extent(2);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t i = 0; i < c; ++i) {
      const double* src = cat.row(i) + b * seg + offset;
      double* out = dst.data() + (b * c + i) * l;
      for (std::size_t t = 0; t < l; ++t) out[t] += src[t * step];
    }
}

void add_bias(Array& y, const Array& b) {
  const std::size_t nb = y.extent(0);
  const std::size_t c = y.extent(1);
  const std::size_t l = y.extent(2);
  for (std::size_t s = 0; s < nb; ++s)
    for (std::size_t o = 0; o < c; ++o) {
      double* row = y.data() + (s * c + o) * l;
      for (std::size_t t = 0; t < l; ++t) row[t] += b[o];
    }
}

void accumulate_bias_grad(const Array& dout, Array& db) {
  const std::size_t nb = dout.extent(0);
  const std::size_t c = dout.extent(1);
  const std::size_t l = dout.extent(2);
  for (std::size_t s = 0; s < nb; ++s)
    for (std::size_t o = 0; o < c; ++o) {
      const double* row = dout.data() + (s * c + o) * l;
      double acc = 0.0;
      for (std::size_t t = 0; t < l; ++t) acc += row[t];
      db[o] += acc;
    }
}

// (A x B x k) -> (B x A x k) with the taps reversed.
Array flip_transpose(const Array& w) {
  const std::size_t a = w.extent(0);
  const std::size_t b = w.extent(1);
  const std::size_t k = w.extent(2);
  Array out({b, a, k});
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      const double* src = w.data() + (i * b + j) * k;
      double* dst = out.data() + (j * a + i) * k;
      for (std::size_t kk = 0; kk < k; ++kk) dst[kk] = src[k - 1 - kk];
    }
  return out;
}

void relu_inplace(Array& a) {
  for (auto& v : a.values()) v = v > 0.0 ? v : 0.0;
}

}  // namespace

// ---- dense ------------------------------------------------------------------

Array dense_forward(const Array& w, const Array& b, const Array& x,
                    Activation act) {
  require_rank(w, 2, "dense weights");
  require_rank(x, 2, "dense input");
  if (w.extent(1) != x.extent(1) || b.size() != w.extent(0))
    throw DimensionError("dense: weights " + shape_to_string(w.shape()) +
                         " incompatible with input " +
                         shape_to_string(x.shape()) + " and bias " +
                         shape_to_string(b.shape()));
  const auto& k = simd::active();
  const std::size_t nb = x.extent(0);
  const std::size_t rows = w.extent(0);
  const std::size_t cols = w.extent(1);
  Array y({nb, rows});
  for (std::size_t s = 0; s < nb; ++s) {
    const double* xs = x.row(s);
    double* ys = y.row(s);
    for (std::size_t r = 0; r < rows; ++r) {
      double v = k.dot(w.row(r), xs, cols) + b[r];
      if (act == Activation::relu && v < 0.0) v = 0.0;
      ys[r] = v;
    }
  }
  return y;
}

void dense_backward(const Array& w, const Array& x, const Array& y,
                    Activation act, const Array& dy, Array& dw, Array& db,
                    Array* dx) {
  const auto& k = simd::active();
  const std::size_t nb = x.extent(0);
  const std::size_t rows = w.extent(0);
  const std::size_t cols = w.extent(1);
  for (std::size_t s = 0; s < nb; ++s) {
    for (std::size_t r = 0; r < rows; ++r) {
      double g = dy.at(s, r);
      if (act == Activation::relu && !(y.at(s, r) > 0.0)) g = 0.0;
      if (g == 0.0) continue;
      db[r] += g;
      k.axpy(g, x.row(s), dw.row(r), cols);
      if (dx != nullptr) k.axpy(g, w.row(r), dx->row(s), cols);
    }
  }
}

// ---- conv1d -----------------------------------------------------------------

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                 std::size_t stride, std::size_t padding) {
  if (stride == 0 || kernel == 0)
    throw DimensionError("conv1d: kernel and stride must be positive");
  if (length + 2 * padding < kernel)
    throw DimensionError("conv1d: input length " + std::to_string(length) +
                         " with padding " + std::to_string(padding) +
                         " is shorter than kernel " + std::to_string(kernel));
  return (length + 2 * padding - kernel) / stride + 1;
}

Array conv1d_forward(const Array& x, const Array& w, const Array& b,
                     std::size_t stride, std::size_t padding) {
  require_rank(x, 3, "conv1d input");
  require_rank(w, 3, "conv1d kernels");
  const std::size_t nb = x.extent(0);
  const std::size_t cin = x.extent(1);
  const std::size_t l = x.extent(2);
  const std::size_t cout = w.extent(0);
  const std::size_t k = w.extent(2);
  if (w.extent(1) != cin || b.size() != cout)
    throw DimensionError("conv1d: kernels " + shape_to_string(w.shape()) +
                         " incompatible with input " +
                         shape_to_string(x.shape()) + " and bias " +
                         shape_to_string(b.shape()));
  const std::size_t lout = conv1d_output_length(l, k, stride, padding);
  const std::size_t seg = l + 2 * padding;
  const Array xcat = to_segments(x, padding, seg, nb * seg);

  Array out({nb, cout, lout});
  if (stride == 1) {
    Array ocat({cout, nb * seg - k + 1});
    simd::active().conv1d_s1(w.data(), xcat.data(), ocat.data(), cout, cin, k,
                             nb * seg);
    add_from_segments(ocat, seg, 0, 1, out);
  } else {
    for (std::size_t s = 0; s < nb; ++s)
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t i = 0; i < cin; ++i) {
          const double* src = xcat.row(i) + s * seg;
          for (std::size_t kk = 0; kk < k; ++kk) {
            const double wv = w.at(o, i, kk);
            for (std::size_t t = 0; t < lout; ++t)
              out.at(s, o, t) += wv * src[t * stride + kk];
          }
        }
  }
  add_bias(out, b);
  return out;
}

void conv1d_backward(const Array& x, const Array& w, std::size_t stride,
                     std::size_t padding, const Array& dout, Array& dw,
                     Array& db, Array* dx) {
  const std::size_t nb = x.extent(0);
  const std::size_t cin = x.extent(1);
  const std::size_t l = x.extent(2);
  const std::size_t cout = w.extent(0);
  const std::size_t k = w.extent(2);
  const std::size_t lout = dout.extent(2);
  const std::size_t seg = l + 2 * padding;
  const Array xcat = to_segments(x, padding, seg, nb * seg);
  const auto& kern = simd::active();
  accumulate_bias_grad(dout, db);

  if (stride == 1) {
    const Array dcat = to_segments(dout, 0, seg, nb * seg - k + 1);
    kern.conv1d_s1_weight_grad(dcat.data(), xcat.data(), dw.data(), cout, cin,
                               k, nb * seg);
    if (dx == nullptr) return;
    // Input gradient: full correlation of dout with the flipped, transposed
    // kernels, then drop the padding columns.
    const std::size_t seg2 = lout + 2 * (k - 1);
    const Array dpad = to_segments(dout, k - 1, seg2, nb * seg2);
    const Array wt = flip_transpose(w);
    Array dxcat({cin, nb * seg2 - k + 1});
    kern.conv1d_s1(wt.data(), dpad.data(), dxcat.data(), cin, cout, k,
                   nb * seg2);
    add_from_segments(dxcat, seg2, padding, 1, *dx);
    return;
  }

  Array dxcat({cin, nb * seg});
  for (std::size_t s = 0; s < nb; ++s)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t i = 0; i < cin; ++i) {
        const double* src = xcat.row(i) + s * seg;
        double* dsrc = dxcat.row(i) + s * seg;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double wv = w.at(o, i, kk);
          double acc = 0.0;
          for (std::size_t t = 0; t < lout; ++t) {
            const double g = dout.at(s, o, t);
            acc += g * src[t * stride + kk];
            dsrc[t * stride + kk] += wv * g;
          }
          dw.at(o, i, kk) += acc;
        }
      }
  if (dx != nullptr) add_from_segments(dxcat, seg, padding, 1, *dx);
}

// ---- transposed conv1d --------------------------------------------------------

std::size_t convtranspose1d_output_length(std::size_t length,
                                          std::size_t kernel,
                                          std::size_t stride,
                                          std::size_t padding) {
  if (length < 1) throw DimensionError("convtranspose1d: empty input");
  if (stride == 0 || kernel == 0)
    throw DimensionError("convtranspose1d: kernel and stride must be positive");
  const std::size_t full = (length - 1) * stride + kernel;
  if (full <= 2 * padding)
    throw DimensionError("convtranspose1d: output length would be < 1 (L=" +
                         std::to_string(length) + ", k=" +
                         std::to_string(kernel) + ", s=" +
                         std::to_string(stride) + ", p=" +
                         std::to_string(padding) + ")");
  return full - 2 * padding;
}

Array convtranspose1d_forward(const Array& x, const Array& w, const Array& b,
                              std::size_t stride, std::size_t padding) {
  require_rank(x, 3, "convtranspose1d input");
  require_rank(w, 3, "convtranspose1d kernels");
  const std::size_t nb = x.extent(0);
  const std::size_t cin = x.extent(1);
  const std::size_t l = x.extent(2);
  const std::size_t cout = w.extent(1);
  const std::size_t k = w.extent(2);
  if (w.extent(0) != cin || b.size() != cout)
    throw DimensionError("convtranspose1d: kernels " +
                         shape_to_string(w.shape()) +
                         " incompatible with input " +
                         shape_to_string(x.shape()) + " and bias " +
                         shape_to_string(b.shape()));
  const std::size_t lout = convtranspose1d_output_length(l, k, stride, padding);
  const auto& kern = simd::active();

  if (stride >= k) {
    // Taps never overlap: each tap is a 1x1 conv writing every stride-th
    // output position.
    const Array xcat = to_segments(x, 0, l, nb * l);
    Array out({nb, cout, lout});
    Array wk({cout, cin, 1});
    Array ocat({cout, nb * l});
    for (std::size_t kk = 0; kk < k; ++kk) {
      for (std::size_t i = 0; i < cin; ++i)
        for (std::size_t o = 0; o < cout; ++o) wk[o * cin + i] = w.at(i, o, kk);
      ocat.fill(0.0);
      kern.conv1d_s1(wk.data(), xcat.data(), ocat.data(), cout, cin, 1, nb * l);
      for (std::size_t s = 0; s < nb; ++s)
        for (std::size_t o = 0; o < cout; ++o) {
          const double* src = ocat.row(o) + s * l;
          for (std::size_t u = 0; u < l; ++u) {
            const std::size_t pos = u * stride + kk;
            if (pos >= padding && pos - padding < lout)
              out.at(s, o, pos - padding) += src[u];
          }
        }
    }
    add_bias(out, b);
    return out;
  }

  // The scatter form equals a stride-1 correlation over the input dilated by
  // `stride` and padded by k-1, with flipped kernels.
  const std::size_t seg = (l - 1) * stride + 1 + 2 * (k - 1);
  const Array xcat = to_segments(x, k - 1, seg, nb * seg, stride);
  const Array wc = flip_transpose(w);
  Array fcat({cout, nb * seg - k + 1});
  kern.conv1d_s1(wc.data(), xcat.data(), fcat.data(), cout, cin, k,
                           nb * seg);
  Array out({nb, cout, lout});
  add_from_segments(fcat, seg, padding, 1, out);
  add_bias(out, b);
  return out;
}

void convtranspose1d_backward(const Array& x, const Array& w,
                              std::size_t stride, std::size_t padding,
                              const Array& dout, Array& dw, Array& db,
                              Array* dx) {
  const std::size_t nb = x.extent(0);
  const std::size_t cin = x.extent(1);
  const std::size_t cout = w.extent(1);
  const std::size_t k = w.extent(2);
  const std::size_t l = x.extent(2);
  const std::size_t lout = dout.extent(2);
  const std::size_t lfull = (l - 1) * stride + k;
  const auto& kern = simd::active();
  accumulate_bias_grad(dout, db);

  if (stride >= k) {
    const Array xcat = to_segments(x, 0, l, nb * l);
    Array dk({cout, nb * l});
    Array wk({cin, cout, 1});
    Array dwk({cin, cout, 1});
    Array dxcat({cin, nb * l});
    for (std::size_t kk = 0; kk < k; ++kk) {
      // dk[o][b, u] = dout[b][o][u * stride + kk - padding], zero outside.
      for (std::size_t s = 0; s < nb; ++s)
        for (std::size_t o = 0; o < cout; ++o) {
          double* dst = dk.row(o) + s * l;
          for (std::size_t u = 0; u < l; ++u) {
            const std::size_t pos = u * stride + kk;
            dst[u] = pos >= padding && pos - padding < lout
                         ? dout.at(s, o, pos - padding)
                         : 0.0;
          }
        }
      dwk.fill(0.0);
      kern.conv1d_s1_weight_grad(xcat.data(), dk.data(), dwk.data(), cin, cout,
                                 1, nb * l);
      for (std::size_t i = 0; i < cin; ++i)
        for (std::size_t o = 0; o < cout; ++o) {
          dw.at(i, o, kk) += dwk[i * cout + o];
          wk[i * cout + o] = w.at(i, o, kk);
        }
      if (dx != nullptr)
        kern.conv1d_s1(wk.data(), dk.data(), dxcat.data(), cin, cout, 1,
                       nb * l);
    }
    if (dx != nullptr) add_from_segments(dxcat, l, 0, 1, *dx);
    return;
  }

  // Gradient w.r.t. the uncropped output, one segment of lfull per sample.
  const Array dfull = to_segments(dout, padding, lfull, nb * lfull);
  // dw[i][o][kk] = sum_u xd[i][u] * dfull[o][u + kk] over the dilated input.
  const Array xd = to_segments(x, 0, lfull, nb * lfull - k + 1, stride);
  kern.conv1d_s1_weight_grad(xd.data(), dfull.data(), dw.data(), cin, cout, k,
                             nb * lfull);
  if (dx == nullptr) return;
  // Correlate at every dilated position, keep every stride-th.
  Array dxcat({cin, nb * lfull - k + 1});
  kern.conv1d_s1(w.data(), dfull.data(), dxcat.data(), cin, cout, k,
                 nb * lfull);
  add_from_segments(dxcat, lfull, 0, stride, *dx);
}

// ---- ResConv ------------------------------------------------------------------

Array resconv_forward(const ResConvSpec& spec, std::span<const Array> p,
                      const Array& x, ResConvCache* cache) {
  Array u = convtranspose1d_forward(x, p[0], p[1], spec.stride, spec.padding);
  Array a1 = conv1d_forward(u, p[2], p[3], 1, 1);
  Array r1 = a1;
  relu_inplace(r1);
  Array out = conv1d_forward(r1, p[4], p[5], 1, 1);
  out.require_shape(u.shape(), "resconv skip connection");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += u[i];
  if (spec.output == Activation::relu) relu_inplace(out);
  if (cache != nullptr) {
    cache->input = x;
    cache->u = std::move(u);
    cache->a1 = std::move(a1);
    cache->r1 = std::move(r1);
    cache->out = out;
  }
  return out;
}

void resconv_backward(const ResConvSpec& spec, std::span<const Array> p,
                      const ResConvCache& c, const Array& dout,
                      std::span<Array> g, Array* dx) {
  Array dz = dout;
  if (spec.output == Activation::relu)
    for (std::size_t i = 0; i < dz.size(); ++i)
      if (!(c.out[i] > 0.0)) dz[i] = 0.0;

  Array dr1(c.r1.shape());
  conv1d_backward(c.r1, p[4], 1, 1, dz, g[4], g[5], &dr1);
  for (std::size_t i = 0; i < dr1.size(); ++i)
    if (!(c.a1[i] > 0.0)) dr1[i] = 0.0;

  Array du = dz;  // skip path
  conv1d_backward(c.u, p[2], 1, 1, dr1, g[2], g[3], &du);
  convtranspose1d_backward(c.input, p[0], spec.stride, spec.padding, du, g[0],
                           g[1], dx);
}

// ---- attention ------------------------------------------------------------------

std::size_t attention_branch_width(std::size_t in_channels) {
  if (in_channels < 3 || (in_channels - 1) % 2 != 0)
    throw ConfigError("attention: " + std::to_string(in_channels) +
                      " input channels cannot be split as 1 (h) + an even, "
                      "non-empty remainder for f and g");
  return (in_channels - 1) / 2;
}

Array attention_forward(std::span<const Array> p, const Array& x,
                        AttentionCache* cache) {
  require_rank(x, 3, "attention input");
  const std::size_t nb = x.extent(0);
  const std::size_t ch = x.extent(1);
  const std::size_t d = attention_branch_width(ch);
  const std::size_t l = x.extent(2);
  const Array& h_w = p[0];
  const Array& h_b = p[1];
  const Array& f_w = p[2];
  const Array& f_b = p[3];
  const Array& g_w = p[4];
  const Array& g_b = p[5];
  const double alpha = p[6][0];
  const double beta = p[7][0];
  if (f_w.size() != d * d || g_w.size() != d * d || f_b.size() != d ||
      g_b.size() != d)
    throw DimensionError("attention: branch weights " +
                         shape_to_string(f_w.shape()) + " do not match width " +
                         std::to_string(d) + " implied by input " +
                         shape_to_string(x.shape()));
  const auto& kern = simd::active();

  Array h({nb, 1, l});
  Array f({nb, d, l});
  Array g({nb, d, l});
  Array map({nb, l, l});
  Array mixed({nb, 1, l});
  Array out({nb, 1, l});

  for (std::size_t s = 0; s < nb; ++s) {
    const double* xs = x.data() + s * ch * l;
    double* hs = h.data() + s * l;
    double* fs = f.data() + s * d * l;
    double* gs = g.data() + s * d * l;
    double* ms = map.data() + s * l * l;
    double* mx = mixed.data() + s * l;
    double* os = out.data() + s * l;

    for (std::size_t t = 0; t < l; ++t) hs[t] = h_w[0] * xs[t] + h_b[0];

    auto project = [&](const Array& w, const Array& b, std::size_t first,
                       double* dst) {
      for (std::size_t c = 0; c < d; ++c) {
        std::fill_n(dst + c * l, l, b[c]);
        for (std::size_t cc = 0; cc < d; ++cc)
          kern.axpy(w[c * d + cc], xs + (first + cc) * l, dst + c * l, l);
      }
    };
    project(f_w, f_b, 1, fs);
    project(g_w, g_b, 1 + d, gs);

    // scores[i][j] = sum_c f[c][i] g[c][j], then softmax along j.
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t i = 0; i < l; ++i)
        kern.axpy(fs[c * l + i], gs + c * l, ms + i * l, l);
    kern.softmax_rows(ms, l, l);

    for (std::size_t i = 0; i < l; ++i) kern.axpy(hs[i], ms + i * l, mx, l);
    for (std::size_t t = 0; t < l; ++t) os[t] = alpha * mx[t] + beta * hs[t];
  }

  if (cache != nullptr) {
    cache->input = x;
    cache->h = std::move(h);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->map = std::move(map);
    cache->mixed = std::move(mixed);
  }
  return out;
}

void attention_backward(std::span<const Array> p, const AttentionCache& c,
                        const Array& dout, std::span<Array> grads, Array* dx) {
  const Array& x = c.input;
  const std::size_t nb = x.extent(0);
  const std::size_t ch = x.extent(1);
  const std::size_t d = attention_branch_width(ch);
  const std::size_t l = x.extent(2);
  const double h_w = p[0][0];
  const Array& f_w = p[2];
  const Array& g_w = p[4];
  const double alpha = p[6][0];
  const double beta = p[7][0];
  const auto& kern = simd::active();

  std::vector<double> dh(l);
  std::vector<double> a_dout(l);
  std::vector<double> ds(l * l);
  std::vector<double> df(d * l);
  std::vector<double> dg(d * l);

  for (std::size_t s = 0; s < nb; ++s) {
    const double* xs = x.data() + s * ch * l;
    const double* hs = c.h.data() + s * l;
    const double* fs = c.f.data() + s * d * l;
    const double* gs = c.g.data() + s * d * l;
    const double* ms = c.map.data() + s * l * l;
    const double* mx = c.mixed.data() + s * l;
    const double* dos = dout.data() + s * l;
    double* dxs = dx != nullptr ? dx->data() + s * ch * l : nullptr;

    grads[6][0] += kern.dot(dos, mx, l);
    grads[7][0] += kern.dot(dos, hs, l);

    // dh_i = beta * dout_i + alpha * sum_j A_ij dout_j
    for (std::size_t i = 0; i < l; ++i) {
      a_dout[i] = kern.dot(ms + i * l, dos, l);
      dh[i] = beta * dos[i] + alpha * a_dout[i];
    }

    // dS_ij = alpha * h_i * A_ij * (dout_j - sum_k A_ik dout_k)
    // dF[c][i] = sum_j dS_ij G[c][j];  dG[c][j] = sum_i dS_ij F[c][i]
    std::fill(df.begin(), df.end(), 0.0);
    std::fill(dg.begin(), dg.end(), 0.0);
    if (alpha != 0.0) {
      for (std::size_t i = 0; i < l; ++i) {
        const double si = alpha * hs[i];
        const double* a = ms + i * l;
        double* row = ds.data() + i * l;
        for (std::size_t j = 0; j < l; ++j)
          row[j] = si * a[j] * (dos[j] - a_dout[i]);
      }
      for (std::size_t cc = 0; cc < d; ++cc)
        for (std::size_t i = 0; i < l; ++i) {
          df[cc * l + i] = kern.dot(ds.data() + i * l, gs + cc * l, l);
          kern.axpy(fs[cc * l + i], ds.data() + i * l, dg.data() + cc * l, l);
        }
    }

    // 1x1 projections
    grads[0][0] += kern.dot(dh.data(), xs, l);
    double sum_dh = 0.0;
    for (double v : dh) sum_dh += v;
    grads[1][0] += sum_dh;

    auto project_back = [&](const Array& w, const std::vector<double>& dproj,
                            Array& dw, Array& db, std::size_t first) {
      for (std::size_t cc = 0; cc < d; ++cc) {
        const double* dp = dproj.data() + cc * l;
        double acc = 0.0;
        for (std::size_t t = 0; t < l; ++t) acc += dp[t];
        db[cc] += acc;
        for (std::size_t ci = 0; ci < d; ++ci) {
          dw[cc * d + ci] += kern.dot(dp, xs + (first + ci) * l, l);
          if (dxs != nullptr)
            kern.axpy(w[cc * d + ci], dp, dxs + (first + ci) * l, l);
        }
      }
    };
    project_back(f_w, df, grads[2], grads[3], 1);
    project_back(g_w, dg, grads[4], grads[5], 1 + d);

    if (dxs != nullptr) kern.axpy(h_w, dh.data(), dxs, l);
  }
}

}  // namespace qbc::nn
