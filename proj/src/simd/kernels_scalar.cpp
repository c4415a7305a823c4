// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "qbc/simd/kernels.hpp"

namespace qbc::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void conv1d_s1_scalar(const double* w, const double* xpad, double* out,
                      std::size_t cout, std::size_t cin, std::size_t k,
                      std::size_t lpad) {
  const std::size_t lout = lpad - k + 1;
  for (std::size_t o = 0; o < cout; ++o) {
    double* dst = out + o * lout;
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad;
      const double* wk = w + (o * cin + i) * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double wv = wk[kk];
        for (std::size_t t = 0; t < lout; ++t) dst[t] += wv * src[t + kk];
      }
    }
  }
}

void conv1d_s1_weight_grad_scalar(const double* dout, const double* xpad,
                                  double* dw, std::size_t cout,
                                  std::size_t cin, std::size_t k,
                                  std::size_t lpad) {
  const std::size_t lout = lpad - k + 1;
  for (std::size_t o = 0; o < cout; ++o) {
    const double* g = dout + o * lout;
    for (std::size_t i = 0; i < cin; ++i) {
      const double* src = xpad + i * lpad;
      double* dwk = dw + (o * cin + i) * k;
      for (std::size_t kk = 0; kk < k; ++kk)
        dwk[kk] += dot_scalar(g, src + kk, lout);
    }
  }
}

void softmax_rows_scalar(double* data, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = data + r * cols;
    double mx = row[0];
    for (std::size_t j = 1; j < cols; ++j) mx = row[j] > mx ? row[j] : mx;
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < cols; ++j) row[j] *= inv;
  }
}

void adam_update_scalar(double* theta, double* m, double* v, const double* g,
                        std::size_t n, const AdamCoeffs& c) {
  const double b1 = c.beta1;
  const double b2 = c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon_hat);
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::scalar,
                         "scalar",
                         &dot_scalar,
                         &axpy_scalar,
                         &conv1d_s1_scalar,
                         &conv1d_s1_weight_grad_scalar,
                         &softmax_rows_scalar,
                         &adam_update_scalar};
  return k;
}

}  // namespace qbc::simd
