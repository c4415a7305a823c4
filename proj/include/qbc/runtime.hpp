// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace qbc {

/// Keeps large activation buffers on the heap instead of fresh mmap pages.
/// Batched training allocates and frees arrays of a few hundred KB per layer;
/// with the default glibc thresholds every one of them page-faults. No-op on
/// other C libraries.
void tune_allocator();

}  // namespace qbc
