// SPDX-License-Identifier: Apache-2.0
// Built only on aarch64, where NEON (with float64 lanes) is baseline.
#include <arm_neon.h>

#include <cmath>

#include "qbc/simd/kernels.hpp"

namespace qbc::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
    s1 = vfmaq_f64(s1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void conv1d_s1_neon(const double* w, const double* xpad, double* out,
                    std::size_t cout, std::size_t cin, std::size_t k,
                    std::size_t lpad) {
  const std::size_t lout = lpad - k + 1;
  for (std::size_t o = 0; o < cout; ++o) {
    double* dst = out + o * lout;
    const double* wo = w + o * cin * k;
    std::size_t t = 0;
    for (; t + 8 <= lout; t += 8) {
      float64x2_t a0 = vld1q_f64(dst + t);
      float64x2_t a1 = vld1q_f64(dst + t + 2);
      float64x2_t a2 = vld1q_f64(dst + t + 4);
      float64x2_t a3 = vld1q_f64(dst + t + 6);
      for (std::size_t i = 0; i < cin; ++i) {
        const double* src = xpad + i * lpad + t;
        const double* wk = wo + i * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const float64x2_t wv = vdupq_n_f64(wk[kk]);
          a0 = vfmaq_f64(a0, wv, vld1q_f64(src + kk));
          a1 = vfmaq_f64(a1, wv, vld1q_f64(src + kk + 2));
          a2 = vfmaq_f64(a2, wv, vld1q_f64(src + kk + 4));
          a3 = vfmaq_f64(a3, wv, vld1q_f64(src + kk + 6));
        }
      }
      vst1q_f64(dst + t, a0);
      vst1q_f64(dst + t + 2, a1);
      vst1q_f64(dst + t + 4, a2);
      vst1q_f64(dst + t + 6, a3);
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
}

void conv1d_s1_weight_grad_neon(const double* dout, const double* xpad,
                                double* dw, std::size_t cout, std::size_t cin,
                                std::size_t k, std::size_t lpad) {
  const std::size_t lout = lpad - k + 1;
  for (std::size_t o = 0; o < cout; ++o) {
    const double* g = dout + o * lout;
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad;
      double* dwk = dw + (o * cin + i) * k;
      for (std::size_t kk = 0; kk < k; ++kk)
        dwk[kk] += dot_neon(g, src + kk, lout);
    }
  }
}

void softmax_rows_neon(double* data, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = data + r * cols;
    double mx = row[0];
    for (std::size_t j = 1; j < cols; ++j) mx = row[j] > mx ? row[j] : mx;
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const float64x2_t inv = vdupq_n_f64(1.0 / sum);
    std::size_t j = 0;
    for (; j + 2 <= cols; j += 2) vst1q_f64(row + j, vmulq_f64(vld1q_f64(row + j), inv));
    for (; j < cols; ++j) row[j] *= 1.0 / sum;
  }
}

void adam_update_neon(double* theta, double* m, double* v, const double* g,
                      std::size_t n, const AdamCoeffs& c) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - c.beta1);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1);
  const float64x2_t bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(c.learning_rate);
  const float64x2_t eps = vdupq_n_f64(c.epsilon_hat);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gv = vld1q_f64(g + i);
    const float64x2_t mv =
        vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, gv));
    const float64x2_t vv = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)),
                                     vmulq_f64(vmulq_f64(omb2, gv), gv));
    vst1q_f64(m + i, mv);
    vst1q_f64(v + i, vv);
    const float64x2_t m_hat = vdivq_f64(mv, bc1);
    const float64x2_t v_hat = vdivq_f64(vv, bc2);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, m_hat),
                                       vaddq_f64(vsqrtq_f64(v_hat), eps));
    vst1q_f64(theta + i, vsubq_f64(vld1q_f64(theta + i), step));
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

const Kernels& neon_kernels() {
  static const Kernels k{Isa::neon,
                         "neon",
                         &dot_neon,
                         &axpy_neon,
                         &conv1d_s1_neon,
                         &conv1d_s1_weight_grad_neon,
                         &softmax_rows_neon,
                         &adam_update_neon};
  return k;
}

}  // namespace qbc::simd
