// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "qbc/cli.hpp"
#include "qbc/runtime.hpp"

int main(int argc, char** argv) {
  qbc::tune_allocator();
  return qbc::cli::cli_main(argc, argv, std::cout, std::cerr);
}
