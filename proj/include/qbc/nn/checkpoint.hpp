// SPDX-License-Identifier: Apache-2.0
#pragma once

// Binary checkpoint container, version 1. All integers and reals are
// little-endian:
//
//   "QBCCKPT\0"             magic, 8 bytes
//   u32 version             = 1
//   u32 len, bytes          preset name
//   u64 input_dim
//   u32 n, u64 x n          dense widths
//   u64 initial_channels, u64 initial_length
//   u32 n, (u64 k, u64 s, u64 p, u64 c, u32 relu) x n   ResConv schedule
//   u64 attention_in_channels
//   u64 step
//   u32 count               parameter arrays; params, then m, then v
//   per array: u32 rank, u64 x rank extents, f64 x volume data

#include <filesystem>
#include <string>
#include <string_view>

#include "qbc/nn/network.hpp"

namespace qbc::nn {

struct Checkpoint {
  NetworkConfig config;
  ModelState state;
};

std::string encode_checkpoint(const NetworkConfig& config,
                              const ModelState& state);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path,
                     const NetworkConfig& config, const ModelState& state);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qbc::nn
