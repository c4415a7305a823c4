// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "qbc/runtime.hpp"

int main(int argc, char** argv) {
  qbc::tune_allocator();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
