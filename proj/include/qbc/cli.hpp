// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace qbc::cli {

/// Entry point of the `qbc` tool. Returns 0 on success, 2 on bad usage and 1
/// on a runtime failure (after printing a one-line cause to `err`).
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace qbc::cli
