// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "qbc/errors.hpp"
#include "qbc/simd/kernels.hpp"

namespace qbc::simd {

#if defined(QBC_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
#if defined(QBC_HAVE_NEON)
const Kernels& neon_kernels();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(QBC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa isa_from_env(Isa fallback) {
  const char* env = std::getenv("QBC_SIMD");
  if (env == nullptr) return fallback;
  const std::string s(env);
  if (s == "scalar") return Isa::scalar;
  if (s == "avx2" && kernels_for(Isa::avx2) != nullptr) return Isa::avx2;
  if (s == "neon" && kernels_for(Isa::neon) != nullptr) return Isa::neon;
  return fallback;
}

std::atomic<const Kernels*>& current() {
  static std::atomic<const Kernels*> ptr{
      kernels_for(isa_from_env(detect_isa()))};
  return ptr;
}

}  // namespace

const Kernels* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_kernels();
    case Isa::avx2:
#if defined(QBC_HAVE_AVX2)
      if (cpu_has_avx2()) return &avx2_kernels();
#endif
      return nullptr;
    case Isa::neon:
#if defined(QBC_HAVE_NEON)
      return &neon_kernels();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Isa detect_isa() {
  if (kernels_for(Isa::avx2) != nullptr) return Isa::avx2;
  if (kernels_for(Isa::neon) != nullptr) return Isa::neon;
  return Isa::scalar;
}

const Kernels& active() { return *current().load(std::memory_order_relaxed); }

void select_isa(Isa isa) {
  const Kernels* k = kernels_for(isa);
  if (k == nullptr)
    throw ConfigError("SIMD variant '" + std::string(isa_name(isa)) +
                      "' is not available on this CPU/build");
  current().store(k, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace qbc::simd
