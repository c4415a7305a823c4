// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>

#include "qbc/errors.hpp"
#include "qbc/space/space.hpp"

using namespace qbc;
using namespace qbc::space;

TEST_CASE("block_index floors and clamps the top edge") {
  CHECK(block_index(std::vector{0.3, 0.7, 0.1}, 2) == BlockIndex{0, 1, 0});
  CHECK(block_index(std::vector{1.0, 0.0}, 2) == BlockIndex{1, 0});
  CHECK(block_index(std::vector{0.5, 0.4999999999}, 2) == BlockIndex{1, 0});
  CHECK_THROWS_AS(block_index(std::vector{1.01}, 2), DomainError);
  CHECK_THROWS_AS(block_index(std::vector{std::nan("")}, 2), DomainError);
}

TEST_CASE("block_index agrees with a brute-force interval search") {
  Rng rng(4);
  for (std::size_t p : {1u, 2u, 3u, 7u}) {
    for (int trial = 0; trial < 2000; ++trial) {
      const double v = trial % 50 == 0 ? 1.0 : rng.uniform();
      std::size_t expect = p - 1;
      for (std::size_t j = 0; j < p; ++j)
        if (v >= stratum_edge(j, p) && v < stratum_edge(j + 1, p)) {
          expect = j;
          break;
        }
      CHECK(block_index(std::vector{v}, p)[0] == expect);
    }
  }
}

TEST_CASE("block counts for the two grids in use") {
  CHECK(block_count(3, 2) == 8);
  CHECK(block_count(10, 2) == 1024);
  CHECK_THROWS_AS(block_count(70, 2), ConfigError);
  for (std::size_t i = 0; i < 1024; ++i)
    CHECK(block_linear(block_from_linear(i, 10, 2), 2) == i);
  CHECK(block_linear(BlockIndex{1, 0, 1}, 2) == 5);
}

TEST_CASE("latin hypercube strata hold one point each") {
  Rng a(9), b(9);
  const auto one = lhs_sample(1, 3, a);
  REQUIRE(one.size() == 1);
  for (double v : one[0]) CHECK((v >= 0.0 && v < 1.0));

  for (std::size_t m : {4u, 13u, 64u}) {
    Rng rng(m);
    const auto pts = lhs_sample(m, 2, rng);
    REQUIRE(pts.size() == m);
    for (std::size_t d = 0; d < 2; ++d) {
      std::set<std::size_t> strata;
      for (const auto& x : pts) strata.insert(stratum_of(x[d], m));
      CHECK(strata.size() == m);
    }
  }
  Rng c(17), d(17);
  CHECK(lhs_sample(10, 4, c) == lhs_sample(10, 4, d));
}

TEST_CASE("sample_in_block stays inside the block") {
  Rng rng(3);
  for (const auto& x : sample_in_block({0, 0, 0}, 2, 200, rng))
    for (double v : x) CHECK((v >= 0.0 && v < 0.5));
  for (const auto& x : sample_in_block({1, 0, 1}, 2, 200, rng)) {
    CHECK(block_index(x, 2) == BlockIndex{1, 0, 1});
  }
  // p = 1: the whole cube, so both halves get hit.
  std::size_t low = 0;
  const auto whole = sample_in_block({0, 0}, 1, 400, rng);
  for (const auto& x : whole) low += x[0] < 0.5;
  CHECK(low > 150);
  CHECK(low < 250);
  CHECK_THROWS_AS(sample_in_block({2, 0}, 2, 1, rng), DomainError);
}

TEST_CASE("block_score examples") {
  BlockRecord one{{{0.4, 3}}};
  CHECK(block_score(one, 3, 0.9) == doctest::Approx(0.4));
  CHECK(block_score(one, 40, 0.5) == doctest::Approx(0.4));
  BlockRecord two{{{1.0, 4}, {0.5, 5}}};
  CHECK(block_score(two, 5, 0.5) == doctest::Approx(0.6666666666666666));
  BlockRecord three{{{1.0, 0}, {0.2, 7}, {0.3, 9}}};
  CHECK(block_score(three, 9, 1.0) == doctest::Approx(0.5));
  CHECK(block_score(BlockRecord{}, 2, 0.9) == 0.0);
  CHECK_THROWS_AS(block_score(one, 3, 0.0), ConfigError);
  CHECK_THROWS_AS(block_score(one, 3, 1.5), ConfigError);
}

TEST_CASE("grid bookkeeping") {
  BlockGrid grid(3, 2);
  CHECK(grid.block_total() == 8);
  const std::size_t b = grid.record(std::vector{0.9, 0.1, 0.2}, 0.3, 0);
  CHECK(b == 4);
  for (std::size_t i = 0; i < 8; ++i) CHECK(grid.count(i) == (i == 4 ? 1u : 0u));
  Rng rng(1);
  for (int i = 0; i < 5; ++i) {
    Point x{rng.uniform(), rng.uniform(), rng.uniform()};
    grid.record(x, 0.1, 1);
  }
  CHECK(grid.instance_total() == 6);
  std::size_t sum = 0;
  for (const auto& [idx, rec] : grid.populated()) sum += rec.instance_count();
  CHECK(sum == 6);
  CHECK_THROWS_AS(grid.record(std::vector{0.1, 0.1, 0.1}, -1.0, 1), DomainError);
}

TEST_CASE("affine scaling") {
  const ParameterSpace unit = ParameterSpace::unit(2);
  CHECK(unit.scale(std::vector{0.25, 1.0}) == Point{0.25, 1.0});
  ParameterSpace s{1, {{2.0, 6.0}}};
  CHECK(s.scale(std::vector{0.5}) == Point{4.0});
  CHECK(s.unscale(std::vector{4.0}) == Point{0.5});
  CHECK_THROWS_AS(s.scale(std::vector{1.5}), DomainError);
  ParameterSpace bad{1, {{3.0, 3.0}}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
