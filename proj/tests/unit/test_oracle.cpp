// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qbc/errors.hpp"
#include "qbc/oracle/cache.hpp"
#include "qbc/oracle/oracle.hpp"
#include "qbc/oracle/subprocess.hpp"
#include "qbc/oracle/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace qbc;
using namespace qbc::oracle;

namespace {

ExternalOracle external(std::vector<std::string> cmd, std::size_t n,
                        std::size_t len, double timeout = 10.0,
                        std::string cache = "") {
  ExternalOracleConfig cfg;
  cfg.command = std::move(cmd);
  cfg.timeout_s = timeout;
  cfg.cache_path = std::move(cache);
  return ExternalOracle(cfg, space::ParameterSpace::unit(n), len);
}

}  // namespace

TEST_CASE("synthetic3 peak at the origin") {
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(synthetic3_at(zero, 0.2) ==
        doctest::Approx(0.5000441913153467).epsilon(1e-14));
  const auto y = synthetic3(zero, 64);
  REQUIRE(y.size() == 64);
  CHECK(y == synthetic3(zero, 64));
  CHECK_THROWS_AS(synthetic3(std::vector{0.0, 0.0, 1.1}, 64), DomainError);
  CHECK_THROWS_AS(synthetic3(std::vector{0.0, 0.0}, 64), DimensionError);
}

TEST_CASE("wider synthetic3 peaks are flatter") {
  for (double t1 : {0.0, 0.5, 1.0}) {
    const auto narrow = synthetic3(std::vector{t1, 0.0, 0.5}, 64);
    const auto wide = synthetic3(std::vector{t1, 1.0, 0.5}, 64);
    auto curvature = [](const std::vector<double>& y) {
      const auto peak = static_cast<std::size_t>(
          std::max_element(y.begin() + 1, y.end() - 1) - y.begin());
      return std::fabs(y[peak - 1] - 2.0 * y[peak] + y[peak + 1]);
    };
    CHECK(curvature(wide) < curvature(narrow));
  }
}

TEST_CASE("synthetic10 examples") {
  const std::vector<double> zero(10, 0.0);
  CHECK(synthetic10_at(zero, 0.1) == doctest::Approx(0.6).epsilon(1e-15));
  const auto y = synthetic10(zero, 64);
  const auto peak = std::max_element(y.begin(), y.end()) - y.begin();
  CHECK(peak == 6);
  CHECK(y[6] == doctest::Approx(0.5356875009373397).epsilon(1e-13));

  std::vector<double> cont(10, 0.0);
  cont[9] = 1.0;
  // Lines sit at 0.1 with width 0.01, so they are negligible at both ends
  // beyond their x = 0 tail.
  const auto c = synthetic10(cont, 64);
  const auto z = synthetic10(zero, 64);
  CHECK(c.back() - z.back() == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(c.front() == z.front());

  std::vector<double> a{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.35};
  std::vector<double> b{0.7, 0.8, 0.9, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.35};
  const auto ya = synthetic10(a, 64), yb = synthetic10(b, 64);
  for (std::size_t j = 0; j < 64; ++j)
    CHECK(ya[j] == doctest::Approx(yb[j]).epsilon(1e-14));
}

TEST_CASE("synthetic oracles are deterministic, non-negative and smooth") {
  Rng rng(77);
  for (auto kind : {OracleKind::synthetic3, OracleKind::synthetic10}) {
    SyntheticOracle o(kind, 64);
    const std::size_t n = o.input_dim();
    double worst_slope = 0.0;
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> t(n);
      for (auto& v : t) v = rng.uniform();
      const auto y = o.evaluate(t);
      CHECK(y == o.evaluate(t));
      CHECK(std::all_of(y.begin(), y.end(), [](double v) { return v >= 0.0; }));
      auto t2 = t;
      const std::size_t axis = rng.index(n);
      t2[axis] = std::min(1.0, t[axis] + 1e-6);
      const auto y2 = o.evaluate(t2);
      const double dt = t2[axis] - t[axis];
      if (dt <= 0.0) continue;
      for (std::size_t j = 0; j < y.size(); ++j)
        worst_slope = std::max(worst_slope, std::fabs(y2[j] - y[j]) / dt);
    }
    // Narrowest width 0.01 with amplitude <= 1.5 bounds the slope well
    // below this.
    CHECK(worst_slope < 1e3);
  }
}

TEST_CASE("command line splitting") {
  CHECK(split_command_line("a 'b c' \"d\\\"e\" f\\ g") ==
        std::vector<std::string>{"a", "b c", "d\"e", "f g"});
  CHECK_THROWS_AS(split_command_line("a 'b"), ConfigError);
  const std::vector<std::string> argv{"x y", "z", "it's"};
  CHECK(split_command_line(join_command_line(argv)) == argv);
}

TEST_CASE("echo child round-trips and repeats hit the cache") {
  auto o = external({"cat"}, 3, 3);
  const std::vector<double> t{0.125, 0.5, 0.1};
  CHECK(o.evaluate(t) == t);
  CHECK(o.launches() == 1);
  CHECK(o.evaluate(t) == t);
  CHECK(o.launches() == 1);
  CHECK(o.cache_hits() == 1);
}

TEST_CASE("evaluate_many runs children concurrently and keeps order") {
  ExternalOracleConfig cfg;
  cfg.command = {"cat"};
  cfg.max_concurrency = 3;
  ExternalOracle o(cfg, space::ParameterSpace::unit(2), 2);
  std::vector<space::Point> pts;
  for (int i = 0; i < 7; ++i) pts.push_back({i / 10.0, 1.0 - i / 10.0});
  const auto ys = o.evaluate_many(pts);
  REQUIRE(ys.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(ys[i] == pts[i]);
  CHECK(o.launches() == 7);
}

TEST_CASE("physical scaling is applied before the child sees the point") {
  ExternalOracleConfig cfg;
  cfg.command = {"cat"};
  ExternalOracle o(cfg, space::ParameterSpace{2, {{2.0, 6.0}, {-1.0, 1.0}}}, 2);
  CHECK(o.evaluate(std::vector{0.5, 0.25}) == std::vector{4.0, -0.5});
}

TEST_CASE("timeouts, bad exits and malformed replies are oracle errors") {
  testing::TempDir dir;
  const auto cache = (dir / "c.bin").string();
  {
    auto slow = external({"sleep", "5"}, 1, 1, 0.2, cache);
    CHECK_THROWS_AS(slow.evaluate(std::vector{0.5}), OracleError);
    CHECK(slow.cache().size() == 0);
  }
  CHECK(EvalCache(cache).size() == 0);

  auto fail = external({"sh", "-c", "echo boom >&2; exit 3"}, 1, 1);
  try {
    fail.evaluate(std::vector{0.5});
    FAIL("expected OracleError");
  } catch (const OracleError& e) {
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
  auto junk = external({"sh", "-c", "echo 1 two"}, 1, 2);
  CHECK_THROWS_AS(junk.evaluate(std::vector{0.5}), OracleError);
  auto short_reply = external({"cat"}, 2, 3);
  CHECK_THROWS_AS(short_reply.evaluate(std::vector{0.5, 0.5}), OracleError);
  auto nan = external({"sh", "-c", "echo nan"}, 1, 1);
  CHECK_THROWS_AS(nan.evaluate(std::vector{0.5}), OracleError);
  auto missing = external({"/nonexistent/oracle"}, 1, 1);
  CHECK_THROWS_AS(missing.evaluate(std::vector{0.5}), OracleError);
}

TEST_CASE("file-backed cache persists bitwise and rejects corruption") {
  testing::TempDir dir;
  const auto path = dir / "cache.bin";
  const std::vector<double> t{0.1, 0.7};
  std::vector<double> first;
  {
    auto o = external({"cat"}, 2, 2, 10.0, path.string());
    first = o.evaluate(t);
    CHECK(o.launches() == 1);
  }
  {
    auto o = external({"cat"}, 2, 2, 10.0, path.string());
    CHECK(o.evaluate(t) == first);
    CHECK(o.launches() == 0);
  }
  std::string bytes = testing::read_file(path);
  testing::write_file(path, bytes.substr(0, bytes.size() - 4));
  CHECK_THROWS_AS(EvalCache{path}, CacheError);
  bytes[0] = 'X';
  testing::write_file(path, bytes);
  CHECK_THROWS_AS(EvalCache{path}, CacheError);
}

TEST_CASE("cache keys use 12 significant digits") {
  CHECK(cache_key(std::vector{0.1, 1.0 / 3.0}) == "0.1 0.333333333333");
  CHECK(cache_key(std::vector{0.1}) == cache_key(std::vector{0.1 + 1e-15}));
}

TEST_CASE("request lines round-trip exactly") {
  const std::vector<double> v{0.1, 1.0 / 3.0, -2.5e-300};
  const auto line = render_request_line(v);
  CHECK(line.back() == '\n');
  CHECK(parse_spectrum_line(line, 3) == v);
}
