// SPDX-License-Identifier: Apache-2.0
#pragma once

// Arithmetic inner loops of the engine. Each kernel has a scalar reference
// implementation and, where the target supports it, an AVX2+FMA (x86-64) or
// NEON (aarch64) variant. The variant is picked once at runtime from CPUID and
// can be overridden with QBC_SIMD=scalar|avx2|neon or select_isa().

#include <cstddef>
#include <string_view>

namespace qbc::simd {

enum class Isa { scalar, avx2, neon };

struct AdamCoeffs {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon_hat;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct Kernels {
  Isa isa;
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // Stride-1 correlation over a pre-padded input:
  //   out[o][t] += sum_i sum_k w[o][i][k] * xpad[i][t + k],  t < lpad - k + 1
  void (*conv1d_s1)(const double* w, const double* xpad, double* out,
                    std::size_t cout, std::size_t cin, std::size_t k,
                    std::size_t lpad);

  //   dw[o][i][k] += sum_t dout[o][t] * xpad[i][t + k]
  void (*conv1d_s1_weight_grad)(const double* dout, const double* xpad,
                                double* dw, std::size_t cout, std::size_t cin,
                                std::size_t k, std::size_t lpad);

  // In-place softmax of each row of a (rows x cols) matrix.
  void (*softmax_rows)(double* data, std::size_t rows, std::size_t cols);

  // In-place Adam update with bias correction.
  void (*adam_update)(double* theta, double* m, double* v, const double* g,
                      std::size_t n, const AdamCoeffs& c);
};

const Kernels& scalar_kernels();

/// Variant for `isa`, or nullptr when not compiled in or not supported by
/// the running CPU.
const Kernels* kernels_for(Isa isa);

/// Best variant supported by this CPU.
Isa detect_isa();

/// Kernels used by the engine.
const Kernels& active();

/// Switch the engine-wide variant. Throws ConfigError if unsupported.
void select_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace qbc::simd
