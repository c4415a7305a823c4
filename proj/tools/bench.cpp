// SPDX-License-Identifier: Apache-2.0
// Times forward and forward+backward passes of the network presets for each
// available SIMD variant and a few batch sizes. Reported times are per
// instance.
#include <chrono>
#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <string>

#include "qbc/nn/network.hpp"
#include "qbc/rng.hpp"
#include "qbc/runtime.hpp"
#include "qbc/simd/kernels.hpp"

int main(int argc, char** argv) {
  qbc::tune_allocator();
  const int reps = argc > 1 ? std::atoi(argv[1]) : 200;
  using clock = std::chrono::steady_clock;
  for (auto isa : {qbc::simd::Isa::scalar, qbc::simd::Isa::avx2,
                   qbc::simd::Isa::neon}) {
    if (qbc::simd::kernels_for(isa) == nullptr) continue;
    qbc::simd::select_isa(isa);
    for (const char* preset : {"desk-64", "paper-literal"}) {
      qbc::nn::Network net(qbc::nn::preset_by_name(preset, 3));
      auto st = net.initialize(1);
      for (std::size_t batch : {1, 8, 16, 32}) {
        qbc::Rng rng(2);
        qbc::nn::Array x({batch, 3});
        for (auto& v : x.values()) v = rng.uniform();
        qbc::nn::Array y({batch, net.output_length()}, 0.3);
        const int n = std::max<int>(1, reps / static_cast<int>(batch));
        auto t0 = clock::now();
        double sink = 0;
        for (int i = 0; i < n; ++i) sink += net.forward_batch(st, x)[0];
        auto t1 = clock::now();
        auto g = net.zero_gradients();
        qbc::nn::Tape tape;
        for (int i = 0; i < n; ++i)
          sink += net.accumulate_mse_gradient(st, x, y, 1.0, g, tape);
        auto t2 = clock::now();
        const double per = static_cast<double>(n) * static_cast<double>(batch);
        std::printf(
            "%-6s %-14s B=%-3zu fwd=%7.1fus fwd+bwd=%7.1fus per instance (%g)\n",
            std::string(qbc::simd::isa_name(isa)).c_str(), preset, batch,
            std::chrono::duration<double, std::micro>(t1 - t0).count() / per,
            std::chrono::duration<double, std::micro>(t2 - t1).count() / per,
            sink);
      }
    }
  }
}
