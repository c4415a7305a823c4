// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qbc/simd/kernels.hpp"

namespace qbc::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                         _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// One output channel, positions [t0, lout).
void conv1d_s1_row_avx2(const double* wo, const double* xpad, double* dst,
                        std::size_t cin, std::size_t k, std::size_t lpad,
                        std::size_t t0, std::size_t lout) {
  std::size_t t = t0;
  for (; t + 8 <= lout; t += 8) {
    __m256d a0 = _mm256_loadu_pd(dst + t);
    __m256d a1 = _mm256_loadu_pd(dst + t + 4);
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad + t;
      const double* wk = wo + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const __m256d wv = _mm256_broadcast_sd(wk + kk);
        a0 = _mm256_fmadd_pd(wv, _mm256_loadu_pd(src + kk), a0);
        a1 = _mm256_fmadd_pd(wv, _mm256_loadu_pd(src + kk + 4), a1);
      }
    }
    _mm256_storeu_pd(dst + t, a0);
    _mm256_storeu_pd(dst + t + 4, a1);
  }
  for (; t + 4 <= lout; t += 4) {
    __m256d a0 = _mm256_loadu_pd(dst + t);
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad + t;
      const double* wk = wo + i * k;
      for (std::size_t kk = 0; kk < k; ++kk)
        a0 = _mm256_fmadd_pd(_mm256_broadcast_sd(wk + kk),
                             _mm256_loadu_pd(src + kk), a0);
    }
    _mm256_storeu_pd(dst + t, a0);
  }
  for (; t < lout; ++t) {
    double s = dst[t];
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad + t;
      const double* wk = wo + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) s += wk[kk] * src[kk];
    }
    dst[t] = s;
  }
}

void conv1d_s1_avx2(const double* w, const double* xpad, double* out,
                    std::size_t cout, std::size_t cin, std::size_t k,
                    std::size_t lpad) {
  const std::size_t lout = lpad - k + 1;
  const std::size_t wstride = cin * k;
  std::size_t o = 0;
  // 4 output channels x 8 positions per register tile; each input load feeds
  // four FMAs.
  for (; o + 4 <= cout; o += 4) {
    double* d0 = out + o * lout;
    double* d1 = d0 + lout;
    double* d2 = d1 + lout;
    double* d3 = d2 + lout;
    const double* w0 = w + o * wstride;
    const double* w1 = w0 + wstride;
    const double* w2 = w1 + wstride;
    const double* w3 = w2 + wstride;
    std::size_t t = 0;
    for (; t + 8 <= lout; t += 8) {
      __m256d a00 = _mm256_loadu_pd(d0 + t), a01 = _mm256_loadu_pd(d0 + t + 4);
      __m256d a10 = _mm256_loadu_pd(d1 + t), a11 = _mm256_loadu_pd(d1 + t + 4);
      __m256d a20 = _mm256_loadu_pd(d2 + t), a21 = _mm256_loadu_pd(d2 + t + 4);
      __m256d a30 = _mm256_loadu_pd(d3 + t), a31 = _mm256_loadu_pd(d3 + t + 4);
      for (std::size_t i = 0; i < cin; ++i) {
        const double* src = xpad + i * lpad + t;
        const std::size_t wi = i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const __m256d x0 = _mm256_loadu_pd(src + kk);
          const __m256d x1 = _mm256_loadu_pd(src + kk + 4);
          __m256d wv = _mm256_broadcast_sd(w0 + wi + kk);
          a00 = _mm256_fmadd_pd(wv, x0, a00);
          a01 = _mm256_fmadd_pd(wv, x1, a01);
          wv = _mm256_broadcast_sd(w1 + wi + kk);
          a10 = _mm256_fmadd_pd(wv, x0, a10);
          a11 = _mm256_fmadd_pd(wv, x1, a11);
          wv = _mm256_broadcast_sd(w2 + wi + kk);
          a20 = _mm256_fmadd_pd(wv, x0, a20);
          a21 = _mm256_fmadd_pd(wv, x1, a21);
          wv = _mm256_broadcast_sd(w3 + wi + kk);
          a30 = _mm256_fmadd_pd(wv, x0, a30);
          a31 = _mm256_fmadd_pd(wv, x1, a31);
        }
      }
      _mm256_storeu_pd(d0 + t, a00), _mm256_storeu_pd(d0 + t + 4, a01);
      _mm256_storeu_pd(d1 + t, a10), _mm256_storeu_pd(d1 + t + 4, a11);
      _mm256_storeu_pd(d2 + t, a20), _mm256_storeu_pd(d2 + t + 4, a21);
      _mm256_storeu_pd(d3 + t, a30), _mm256_storeu_pd(d3 + t + 4, a31);
    }
    if (t < lout) {
      conv1d_s1_row_avx2(w0, xpad, d0, cin, k, lpad, t, lout);
      conv1d_s1_row_avx2(w1, xpad, d1, cin, k, lpad, t, lout);
      conv1d_s1_row_avx2(w2, xpad, d2, cin, k, lpad, t, lout);
      conv1d_s1_row_avx2(w3, xpad, d3, cin, k, lpad, t, lout);
    }
  }
  for (; o < cout; ++o)
    conv1d_s1_row_avx2(w + o * wstride, xpad, out + o * lout, cin, k, lpad, 0,
                       lout);
}

// Four output channels x K taps of one input channel: 4 + K loads feed 4K
// independent accumulators per step of four positions.
template <std::size_t K>
void weight_grad_tile4(const double* g0, const double* g1, const double* g2,
                       const double* g3, const double* src, std::size_t lout,
                       double* dw0, double* dw1, double* dw2, double* dw3) {
  __m256d acc[4][K];
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t kk = 0; kk < K; ++kk) acc[r][kk] = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 4 <= lout; t += 4) {
    const __m256d d0 = _mm256_loadu_pd(g0 + t);
    const __m256d d1 = _mm256_loadu_pd(g1 + t);
    const __m256d d2 = _mm256_loadu_pd(g2 + t);
    const __m256d d3 = _mm256_loadu_pd(g3 + t);
    for (std::size_t kk = 0; kk < K; ++kk) {
      const __m256d xv = _mm256_loadu_pd(src + t + kk);
      acc[0][kk] = _mm256_fmadd_pd(d0, xv, acc[0][kk]);
      acc[1][kk] = _mm256_fmadd_pd(d1, xv, acc[1][kk]);
      acc[2][kk] = _mm256_fmadd_pd(d2, xv, acc[2][kk]);
      acc[3][kk] = _mm256_fmadd_pd(d3, xv, acc[3][kk]);
    }
  }
  double* dws[4] = {dw0, dw1, dw2, dw3};
  const double* gs[4] = {g0, g1, g2, g3};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t kk = 0; kk < K; ++kk) {
      double v = hsum(acc[r][kk]);
      for (std::size_t u = t; u < lout; ++u) v += gs[r][u] * src[u + kk];
      dws[r][kk] += v;
    }
}

void conv1d_s1_weight_grad_avx2(const double* dout, const double* xpad,
                                double* dw, std::size_t cout, std::size_t cin,
                                std::size_t k, std::size_t lpad) {
  const std::size_t lout = lpad - k + 1;
  std::size_t o = 0;
  if (k <= 3) {
    for (; o + 4 <= cout; o += 4) {
      const double* g = dout + o * lout;
      for (std::size_t i = 0; i < cin; ++i) {
        const double* src = xpad + i * lpad;
        double* d0 = dw + (o * cin + i) * k;
        double* d1 = d0 + cin * k;
        double* d2 = d1 + cin * k;
        double* d3 = d2 + cin * k;
        const double* g1 = g + lout;
        const double* g2 = g1 + lout;
        const double* g3 = g2 + lout;
        switch (k) {
          case 1: weight_grad_tile4<1>(g, g1, g2, g3, src, lout, d0, d1, d2, d3); break;
          case 2: weight_grad_tile4<2>(g, g1, g2, g3, src, lout, d0, d1, d2, d3); break;
          default: weight_grad_tile4<3>(g, g1, g2, g3, src, lout, d0, d1, d2, d3); break;
        }
      }
    }
  }
  for (; o < cout; ++o) {
    const double* g = dout + o * lout;
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad;
      double* dwk = dw + (o * cin + i) * k;
      for (std::size_t kk = 0; kk < k; ++kk)
        dwk[kk] += dot_avx2(g, src + kk, lout);
    }
  }
}

// exp on 4 lanes: x = n ln2 + r with |r| <= ln2/2, degree-13 Taylor series
// for e^r (truncation < 1e-17), then scale by 2^n through the exponent bits.
// Inputs below -708 flush to 0.
inline __m256d exp_avx2(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_max_pd(_mm256_min_pd(x, hi), lo);
  const __m256d n = _mm256_round_pd(
      _mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);
  // Estrin evaluation keeps the dependency chain short.
  auto c = [](double v) { return _mm256_set1_pd(v); };
  const __m256d r2 = _mm256_mul_pd(r, r);
  const __m256d r4 = _mm256_mul_pd(r2, r2);
  const __m256d r8 = _mm256_mul_pd(r4, r4);
  const __m256d p01 = _mm256_fmadd_pd(r, c(1.0), c(1.0));
  const __m256d p23 = _mm256_fmadd_pd(r, c(1.0 / 6.0), c(0.5));
  const __m256d p45 = _mm256_fmadd_pd(r, c(1.0 / 120.0), c(1.0 / 24.0));
  const __m256d p67 = _mm256_fmadd_pd(r, c(1.0 / 5040.0), c(1.0 / 720.0));
  const __m256d p89 = _mm256_fmadd_pd(r, c(1.0 / 362880.0), c(1.0 / 40320.0));
  const __m256d p1011 =
      _mm256_fmadd_pd(r, c(1.0 / 39916800.0), c(1.0 / 3628800.0));
  const __m256d p1213 =
      _mm256_fmadd_pd(r, c(1.0 / 6227020800.0), c(1.0 / 479001600.0));
  const __m256d q0 = _mm256_fmadd_pd(p23, r2, p01);
  const __m256d q1 = _mm256_fmadd_pd(p67, r2, p45);
  const __m256d q2 = _mm256_fmadd_pd(p1011, r2, p89);
  const __m256d s0 = _mm256_fmadd_pd(q1, r4, q0);
  const __m256d s1 = _mm256_fmadd_pd(p1213, r4, q2);
  const __m256d p = _mm256_fmadd_pd(s1, r8, s0);
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(n32),
                                  _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d res = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(under, res);
}

void softmax_rows_avx2(double* data, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = data + r * cols;
    double mx = row[0];
    std::size_t j = 0;
    if (cols >= 4) {
      __m256d m4 = _mm256_loadu_pd(row);
      for (j = 4; j + 4 <= cols; j += 4)
        m4 = _mm256_max_pd(m4, _mm256_loadu_pd(row + j));
      alignas(32) double lanes[4];
      _mm256_store_pd(lanes, m4);
      mx = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    }
    for (; j < cols; ++j) mx = row[j] > mx ? row[j] : mx;
    const __m256d mv = _mm256_set1_pd(mx);
    __m256d sv = _mm256_setzero_pd();
    j = 0;
    for (; j + 4 <= cols; j += 4) {
      const __m256d e = exp_avx2(_mm256_sub_pd(_mm256_loadu_pd(row + j), mv));
      _mm256_storeu_pd(row + j, e);
      sv = _mm256_add_pd(sv, e);
    }
    double sum = hsum(sv);
    for (; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const __m256d inv = _mm256_set1_pd(1.0 / sum);
    j = 0;
    for (; j + 4 <= cols; j += 4)
      _mm256_storeu_pd(row + j, _mm256_mul_pd(_mm256_loadu_pd(row + j), inv));
    for (; j < cols; ++j) row[j] *= 1.0 / sum;
  }
}

void adam_update_avx2(double* theta, double* m, double* v, const double* g,
                      std::size_t n, const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.learning_rate);
  const __m256d eps = _mm256_set1_pd(c.epsilon_hat);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                               _mm256_mul_pd(omb1, gv));
    __m256d vv =
        _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                      _mm256_mul_pd(_mm256_mul_pd(omb2, gv), gv));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d m_hat = _mm256_div_pd(mv, bc1);
    const __m256d v_hat = _mm256_div_pd(vv, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat),
                                       _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(theta + i, _mm256_sub_pd(_mm256_loadu_pd(theta + i), step));
  }
  for (; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon_hat);
  }
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{Isa::avx2,
                         "avx2",
                         &dot_avx2,
                         &axpy_avx2,
                         &conv1d_s1_avx2,
                         &conv1d_s1_weight_grad_avx2,
                         &softmax_rows_avx2,
                         &adam_update_avx2};
  return k;
}

}  // namespace qbc::simd
