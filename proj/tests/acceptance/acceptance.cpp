// SPDX-License-Identifier: Apache-2.0
// Acceptance suite. Prints one PASS/FAIL line per criterion on stdout and
// per-case detail on stderr; exits 0 only when every selected criterion
// passes.
//
//   qbc_acceptance                  all ten criteria
//   qbc_acceptance --only 1,2,10    a subset
//   qbc_acceptance --seeds 3        fewer seeds for the seeded experiments
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbc/acquisition/acquisition.hpp"
#include "qbc/cli.hpp"
#include "qbc/errors.hpp"
#include "qbc/io/config.hpp"
#include "qbc/nn/layers.hpp"
#include "qbc/nn/network.hpp"
#include "qbc/oracle/oracle.hpp"
#include "qbc/orchestrator/learner.hpp"
#include "qbc/runtime.hpp"
#include "qbc/space/space.hpp"
#include "support/gradient_cases.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;
using namespace qbc;
using orchestrator::ActiveLearner;
using orchestrator::RunConfig;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::ostream& detail() { return std::cerr; }

// ---- 1: gradients -----------------------------------------------------------

Outcome gradients(std::size_t seeds) {
  Outcome o;
  double worst = 0.0;
  std::string worst_case;
  for (auto c : testing::kAllLayerCases) {
    double layer_worst = 0.0;
    for (std::uint64_t s = 1; s <= seeds; ++s) {
      const auto r = testing::gradient_case(c, s);
      layer_worst = std::max(layer_worst, r.report.max_relative_error);
      if (r.report.max_relative_error >= 1e-4) {
        o.pass = false;
        detail() << "  " << testing::to_string(c) << " seed " << s << ": "
              << r.report.max_relative_error << " (" << r.description
              << ")\n";
      }
      if (r.report.max_relative_error > worst) {
        worst = r.report.max_relative_error;
        worst_case = testing::to_string(c);
      }
    }
    detail() << "  " << testing::to_string(c) << ": worst "
          << layer_worst << " over " << seeds << " seeds\n";
  }
  o.detail = "max relative error " + fmt("%.2e", worst) + " (" + worst_case +
             "), bound 1e-4, " + std::to_string(seeds) + " seeds x 6 layers";
  return o;
}

// ---- 2: architecture shapes --------------------------------------------------

Outcome shapes() {
  Outcome o;
  const auto literal = nn::paper_literal_preset(3);
  const auto desk = nn::desk64_preset(3);
  const std::size_t l6 = literal.output_length();
  const std::size_t l64 = desk.output_length();
  const std::size_t d = nn::attention_branch_width(15);
  const nn::Network net(literal);
  o.pass = l6 == 6 && l64 == 64 && d == 7 &&
           net.forward(net.initialize(1), std::vector{0.2, 0.4, 0.6}).size() == 6;

  Rng rng(2);
  double row_err = 0.0, skip_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = 4 + rng.index(60), nb = 1 + rng.index(3);
    std::vector<nn::Array> p{nn::Array({1, 1, 1}, {rng.uniform(-2, 2)}),
                             nn::Array({1}, {rng.uniform(-1, 1)}),
                             nn::Array({d, d, 1}), nn::Array({d}),
                             nn::Array({d, d, 1}), nn::Array({d}),
                             nn::Array({1}, {0.0}),
                             nn::Array({1}, {rng.uniform(-2, 2)})};
    for (std::size_t i = 2; i < 6; ++i)
      for (auto& v : p[i].values()) v = rng.uniform(-2, 2);
    nn::Array x({nb, 15, len});
    for (auto& v : x.values()) v = rng.uniform(-3, 3);
    nn::AttentionCache cache;
    const nn::Array y = nn::attention_forward(p, x, &cache);
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < len; ++j) s += cache.map.at(b, i, j);
        row_err = std::max(row_err, std::fabs(s - 1.0));
        const double h = p[0][0] * x.at(b, 0, i) + p[1][0];
        skip_err = std::max(skip_err, std::fabs(y.at(b, 0, i) - p[7][0] * h));
      }
  }
  o.pass = o.pass && row_err <= 1e-12 && skip_err <= 1e-12;
  o.detail = "paper-literal L=" + std::to_string(l6) +
             ", desk-64 L=" + std::to_string(l64) + ", split 1/" +
             std::to_string(d) + "/" + std::to_string(d) +
             ", row-sum err " + fmt("%.1e", row_err) + ", alpha=0 err " +
             fmt("%.1e", skip_err);
  return o;
}

// ---- 3: disagreement ----------------------------------------------------------

Outcome disagreement() {
  Outcome o;
  Rng rng(3);
  double worst = 0.0;
  bool zero_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t l = 2 + rng.index(4), d = 1 + rng.index(64);
    std::vector<std::vector<double>> outs(l, std::vector<double>(d));
    const bool identical = trial % 10 == 0;
    for (auto& v : outs[0]) v = rng.uniform(-5, 5);
    for (std::size_t i = 1; i < l; ++i)
      for (std::size_t j = 0; j < d; ++j)
        outs[i][j] = identical ? outs[0][j] : rng.uniform(-5, 5);
    // Brute force in extended precision, two passes per coordinate.
    long double total = 0.0L;
    for (std::size_t j = 0; j < d; ++j) {
      long double mean = 0.0L;
      for (std::size_t i = 0; i < l; ++i) mean += outs[i][j];
      mean /= static_cast<long double>(l);
      long double var = 0.0L;
      for (std::size_t i = 0; i < l; ++i)
        var += (outs[i][j] - mean) * (outs[i][j] - mean);
      total += var / static_cast<long double>(l);
    }
    const double got = acquisition::ensemble_disagreement(outs);
    worst = std::max(worst, std::fabs(got - static_cast<double>(total)));
    zero_ok = zero_ok && ((got == 0.0) == identical);
  }
  o.pass = worst <= 1e-12 && zero_ok;
  o.detail = "max |diff| " + fmt("%.1e", worst) +
             " over 1000 cases, zero iff identical: " + (zero_ok ? "yes" : "no");
  return o;
}

// ---- 4: sampling and blocks ----------------------------------------------------

Outcome sampling() {
  Outcome o;
  std::size_t lhs_checks = 0;
  for (std::size_t m : {2u, 4u, 16u, 64u, 256u})
    for (std::size_t n : {1u, 2u, 3u, 10u}) {
      Rng rng(m * 100 + n);
      const auto pts = space::lhs_sample(m, n, rng);
      bool ok = pts.size() == m;
      for (std::size_t dim = 0; dim < n && ok; ++dim) {
        std::vector<int> hits(m, 0);
        for (const auto& x : pts) {
          // Brute-force stratum search.
          for (std::size_t j = 0; j < m; ++j)
            if (x[dim] >= static_cast<double>(j) / m &&
                x[dim] < static_cast<double>(j + 1) / m)
              ++hits[j];
        }
        ok = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
      }
      if (!ok) {
        o.pass = false;
        detail() << "  LHS failed at m=" << m << " n=" << n << "\n";
      }
      ++lhs_checks;
    }
  std::size_t mismatches = 0;
  for (std::size_t p : {2u, 3u})
    for (std::size_t n : {2u, 3u, 10u}) {
      Rng rng(p * 10 + n);
      for (int i = 0; i < 1000; ++i) {
        space::Point x(n);
        for (auto& v : x) v = rng.index(50) == 0 ? 1.0 : rng.uniform();
        const auto got = space::block_index(x, p);
        // Rectangle search: the block whose [lo, hi) box holds x, with the
        // top face closed.
        space::BlockIndex expect(n);
        for (std::size_t dim = 0; dim < n; ++dim)
          for (std::size_t j = 0; j < p; ++j) {
            const double lo = static_cast<double>(j) / p;
            const double hi = static_cast<double>(j + 1) / p;
            if (x[dim] >= lo && (x[dim] < hi || (j == p - 1 && x[dim] <= 1.0))) {
              expect[dim] = j;
              break;
            }
          }
        mismatches += got != expect;
      }
    }
  const std::size_t b3 = space::BlockGrid(3, 2).block_total();
  const std::size_t b10 = space::BlockGrid(10, 2).block_total();
  o.pass = o.pass && mismatches == 0 && b3 == 8 && b10 == 1024;
  o.detail = "LHS " + std::to_string(lhs_checks) + " (m, n) pairs stratified, " +
             "block_index mismatches " + std::to_string(mismatches) +
             "/6000, blocks " + std::to_string(b3) + " and " +
             std::to_string(b10);
  return o;
}

// ---- 5: bookkeeping ---------------------------------------------------------------

Outcome bookkeeping() {
  Outcome o;
  RunConfig c = orchestrator::synthetic3_defaults();
  c.epochs = 30;
  c.seed = 5;
  c.deterministic = true;
  oracle::SyntheticOracle oracle(oracle::OracleKind::synthetic3, 64);
  ActiveLearner learner(c, oracle);
  learner.initialize();
  double best = std::numeric_limits<double>::infinity();
  bool sums_ok = true, best_ok = true;
  while (learner.next_epoch() < c.epochs) {
    const auto& r = learner.run_epoch();
    std::size_t total = 0;
    for (const auto& [idx, rec] : learner.grid().populated())
      total += rec.instance_count();
    sums_ok = sums_ok && total == learner.dataset().size() &&
              r.dataset_size == total;
    best_ok = best_ok && learner.best().val_mse <= best;
    best = learner.best().val_mse;
  }
  const std::size_t size = learner.dataset().size();
  o.pass = size == 152 && sums_ok && best_ok;
  o.detail = "final size " + std::to_string(size) + " (expect 152), block sums " +
             (sums_ok ? "match" : "MISMATCH") + " every epoch, best val " +
             (best_ok ? "non-increasing" : "INCREASED") + " (" +
             fmt("%.3e", best) + ")";
  return o;
}

// ---- 6: determinism ---------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  testing::TempDir dir;
  io::ConfigFile cf{orchestrator::synthetic3_defaults(), ""};
  cf.run.epochs = 12;
  cf.run.seed = 6;
  testing::write_file(dir / "run.ini", io::render_config(cf));
  for (const char* name : {"a", "b"}) {
    const std::string cfg = (dir / "run.ini").string();
    const std::string out = (dir / name).string();
    const char* argv[] = {"qbc",  "run",    "--config", cfg.c_str(),
                          "--deterministic", "--outdir", out.c_str()};
    std::ostringstream sink;
    if (cli::cli_main(7, argv, sink, sink) != 0)
      throw std::runtime_error("qbc run failed: " + sink.str());
  }
  std::vector<std::string> same;
  for (const char* f : {"dataset.jsonl", "metrics.csv", "validation.jsonl",
                        "test.jsonl", "summary.json", "checkpoints/best.ckpt"}) {
    const std::string a = testing::read_file(dir / "a" / f);
    const bool eq = !a.empty() && a == testing::read_file(dir / "b" / f);
    if (!eq) {
      o.pass = false;
      detail() << "  " << f << " differs\n";
    }
    same.push_back(std::string(f) + (eq ? "" : " (DIFFERS)"));
  }
  o.detail = "byte-identical:";
  for (const auto& s : same) o.detail += " " + s;
  return o;
}

// ---- 7: data efficiency --------------------------------------------------------------

Outcome data_efficiency(std::size_t seeds) {
  Outcome o;
  std::size_t beat_equal = 0, within_double = 0;
  for (std::uint64_t s = 1; s <= seeds; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig c = orchestrator::synthetic3_defaults();
    c.seed = s;
    c.deterministic = true;
    oracle::SyntheticOracle oracle(oracle::OracleKind::synthetic3, 64);
    ActiveLearner learner(c, oracle);
    learner.run();
    const double active = learner.reported_test_mse();
    const std::size_t steps = orchestrator::member_step_budget(c);
    const std::size_t n = orchestrator::final_dataset_size(c);
    const auto equal = orchestrator::run_baseline(
        c, oracle, n, orchestrator::BaselineStrategy::uniform, steps);
    const auto twice = orchestrator::run_baseline(
        c, oracle, 2 * n, orchestrator::BaselineStrategy::uniform, steps);
    const bool a = active <= equal.test_mse;
    const bool b = active <= 1.25 * twice.test_mse;
    beat_equal += a;
    within_double += b;
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    char line[256];
    std::snprintf(line, sizeof line,
                  "  seed %2llu: active %.3e (n=%zu)  uniform %.3e (n=%zu)  "
                  "uniform %.3e (n=%zu)  %s %s  surprise %.2f  %.0fs\n",
                  static_cast<unsigned long long>(s), active, n, equal.test_mse,
                  n, twice.test_mse, 2 * n, a ? "yes" : "no ", b ? "yes" : "no ",
                  orchestrator::surprise_fraction(learner.epochs()), secs);
    detail() << line << std::flush;
  }
  const std::size_t need = (7 * seeds + 9) / 10;
  o.pass = beat_equal >= need && within_double >= need;
  o.detail = "active <= equal-budget uniform in " + std::to_string(beat_equal) +
             "/" + std::to_string(seeds) + ", active <= 1.25x uniform(2n) in " +
             std::to_string(within_double) + "/" + std::to_string(seeds) +
             " (need " + std::to_string(need) + ")";
  return o;
}

// ---- 8 and 9: exploration and final retrain --------------------------------------------

struct Synthetic10Result {
  std::size_t explore_blocks = 0;
  std::size_t exploit_blocks = 0;
  double loaded = 0.0;
  double retrained = 0.0;
};

std::vector<Synthetic10Result> synthetic10_cache;

const std::vector<Synthetic10Result>& synthetic10_runs(std::size_t seeds) {
  if (synthetic10_cache.size() == seeds) return synthetic10_cache;
  synthetic10_cache.clear();
  for (std::uint64_t s = 1; s <= seeds; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    Synthetic10Result r;
    oracle::SyntheticOracle oracle(oracle::OracleKind::synthetic10, 64);

    RunConfig c = orchestrator::synthetic10_defaults();
    c.seed = s;
    c.deterministic = true;
    ActiveLearner explore(c, oracle);
    explore.run();
    r.explore_blocks = explore.grid().occupied_blocks();
    r.loaded = explore.retrain()->loaded_val_mse;
    r.retrained = explore.retrain()->final_val_mse;

    RunConfig e = c;
    e.acquisition.exploration_period = std::numeric_limits<std::size_t>::max();
    e.final_retrain_epochs = 0;
    ActiveLearner exploit(e, oracle);
    exploit.run();
    r.exploit_blocks = exploit.grid().occupied_blocks();

    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    char line[256];
    std::snprintf(line, sizeof line,
                  "  seed %2llu: occupied blocks least-populated %zu vs "
                  "exploit-only %zu; retrain val %.3e -> %.3e  %.0fs\n",
                  static_cast<unsigned long long>(s), r.explore_blocks,
                  r.exploit_blocks, r.loaded, r.retrained, secs);
    detail() << line << std::flush;
    synthetic10_cache.push_back(r);
  }
  return synthetic10_cache;
}

Outcome exploration(std::size_t seeds) {
  Outcome o;
  std::size_t wins = 0;
  for (const auto& r : synthetic10_runs(seeds))
    wins += r.explore_blocks > r.exploit_blocks;
  const std::size_t need = (8 * seeds + 9) / 10;
  o.pass = wins >= need;
  o.detail = "least-populated occupies more blocks in " + std::to_string(wins) +
             "/" + std::to_string(seeds) + " (need " + std::to_string(need) + ")";
  return o;
}

Outcome final_retrain(std::size_t seeds) {
  Outcome o;
  std::size_t ok = 0;
  for (const auto& r : synthetic10_runs(seeds)) ok += r.retrained <= r.loaded;
  const std::size_t need = (8 * seeds + 9) / 10;
  o.pass = ok >= need;
  o.detail = "validation MSE not increased in " + std::to_string(ok) + "/" +
             std::to_string(seeds) + " (need " + std::to_string(need) + ", F=" +
             std::to_string(orchestrator::synthetic10_defaults()
                                .final_retrain_epochs) +
             ")";
  return o;
}

// ---- 10: oracle conformance ----------------------------------------------------------

Outcome oracles() {
  Outcome o;
  std::vector<std::string> notes;

  oracle::ExternalOracleConfig cfg;
  cfg.command = {"cat"};
  oracle::ExternalOracle echo(cfg, space::ParameterSpace::unit(3), 3);
  const std::vector<double> t{0.125, 0.5, 0.875};
  const bool round_trip = echo.evaluate(t) == t;
  const bool cache_hit = echo.evaluate(t) == t && echo.launches() == 1 &&
                         echo.cache_hits() == 1;

  oracle::ExternalOracleConfig slow_cfg;
  slow_cfg.command = {"sleep", "5"};
  slow_cfg.timeout_s = 0.3;
  oracle::ExternalOracle slow(slow_cfg, space::ParameterSpace::unit(1), 1);
  bool timeout = false;
  try {
    slow.evaluate(std::vector{0.5});
  } catch (const OracleError&) {
    timeout = slow.cache().size() == 0;
  }

  bool deterministic = true, nonnegative = true;
  Rng rng(10);
  for (auto kind : {oracle::OracleKind::synthetic3, oracle::OracleKind::synthetic10}) {
    oracle::SyntheticOracle s(kind, 64);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> th(s.input_dim());
      for (auto& v : th) v = rng.uniform();
      const auto y = s.evaluate(th);
      deterministic = deterministic && y == s.evaluate(th);
      nonnegative = nonnegative &&
                    std::all_of(y.begin(), y.end(), [](double v) { return v >= 0.0; });
    }
  }
  o.pass = round_trip && cache_hit && timeout && deterministic && nonnegative;
  auto flag = [](bool b) { return b ? "ok" : "FAIL"; };
  o.detail = std::string("echo ") + flag(round_trip) + ", cache hit " +
             flag(cache_hit) + ", timeout " + flag(timeout) +
             ", synthetic determinism " + flag(deterministic) +
             ", non-negativity " + flag(nonnegative) + " (1000 probes each)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"qbc acceptance criteria"};
  std::vector<int> only;
  std::size_t seeds = 10;
  std::size_t grad_seeds = 20;
  app.add_option("--only", only, "criteria to run (1-10)")->delimiter(',');
  app.add_option("--seeds", seeds, "seeds for criteria 7-9")
      ->check(CLI::PositiveNumber);
  app.add_option("--gradient-seeds", grad_seeds, "seeds for criterion 1")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "gradient correctness", [&] { return gradients(grad_seeds); }},
      {2, "architecture shapes", shapes},
      {3, "disagreement equivalence", disagreement},
      {4, "sampling and block properties", sampling},
      {5, "epoch bookkeeping", bookkeeping},
      {6, "determinism", determinism},
      {7, "relative data efficiency", [&] { return data_efficiency(seeds); }},
      {8, "exploration effect", [&] { return exploration(seeds); }},
      {9, "final retrain", [&] { return final_retrain(seeds); }},
      {10, "oracle conformance", oracles},
  };

  bool all_pass = true;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    detail() << "[C" << c.id << "] " << c.name << "\n" << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    char head[96];
    std::snprintf(head, sizeof head, "C%-2d %s  %-30s", c.id,
                  r.pass ? "PASS" : "FAIL", c.name);
    std::cout << head << " " << r.detail << "  [" << fmt("%.1f", secs)
              << "s]\n"
              << std::flush;
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}
