// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "qbc/cli.hpp"
#include "qbc/io/config.hpp"
#include "support/small_run.hpp"
#include "support/temp_dir.hpp"

using namespace qbc;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qbc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(),
                                 out, err);
  return {code, out.str(), err.str()};
}

std::string value_of(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  const auto start = pos + key.size() + 1;
  return text.substr(start, text.find_first_of(" \n", start) - start);
}

std::string small_config(const testing::TempDir& dir) {
  io::ConfigFile c{testing::small_run_config(21), ""};
  c.run.deterministic = false;
  const auto path = dir / "small.ini";
  testing::write_file(path, io::render_config(c));
  return path.string();
}

}  // namespace

TEST_CASE("deterministic runs write identical artefacts") {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const auto a = run_cli({"run", "--config", cfg, "--deterministic", "--outdir",
                          (dir / "a").string()});
  const auto b = run_cli({"run", "--config", cfg, "--deterministic", "--outdir",
                          (dir / "b").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  // config.ini differs by its output directory.
  for (const char* f : {"dataset.jsonl", "metrics.csv", "summary.json",
                        "checkpoints/best.ckpt",
                        "plots/loss.svg"}) {
    CAPTURE(f);
    const std::string fa = testing::read_file(dir / "a" / f);
    CHECK_FALSE(fa.empty());
    CHECK(fa == testing::read_file(dir / "b" / f));
  }
  CHECK(value_of(a.out, "test_mse") == value_of(b.out, "test_mse"));
  // One progress line per epoch.
  std::size_t lines = 0;
  for (char ch : a.err) lines += ch == '\n';
  CHECK(lines >= 6);
}

TEST_CASE("evaluate reproduces the reported test MSE") {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const auto run = run_cli({"run", "--config", cfg, "--deterministic",
                            "--outdir", (dir / "r").string()});
  REQUIRE(run.code == 0);
  const auto ev = run_cli({"evaluate", "--checkpoint",
                           (dir / "r" / "checkpoints" / "best.ckpt").string(),
                           "--dataset", (dir / "r" / "test.jsonl").string()});
  REQUIRE(ev.code == 0);
  CHECK(value_of(ev.out, "mse") == value_of(run.out, "test_mse"));

  const auto plot = run_cli({"plot", "--run", (dir / "r").string()});
  CHECK(plot.code == 0);
}

TEST_CASE("seed override changes the run") {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const auto a = run_cli({"run", "--config", cfg, "--deterministic", "--seed",
                          "5", "--outdir", (dir / "a").string()});
  const auto b = run_cli({"run", "--config", cfg, "--deterministic", "--seed",
                          "6", "--outdir", (dir / "b").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(testing::read_file(dir / "a" / "dataset.jsonl") !=
        testing::read_file(dir / "b" / "dataset.jsonl"));
  CHECK(testing::read_file(dir / "a" / "config.ini").find("seed = 5") !=
        std::string::npos);
}

TEST_CASE("baseline subcommand") {
  testing::TempDir dir;
  const std::string cfg = small_config(dir);
  const auto a = run_cli({"baseline", "--config", cfg, "--deterministic",
                          "--budget", "24", "--steps", "60", "--outdir",
                          (dir / "b").string()});
  REQUIRE(a.code == 0);
  CHECK(value_of(a.out, "test_mse").size() > 0);
  CHECK(std::filesystem::exists(dir / "b" / "checkpoints" / "best.ckpt"));
}

TEST_CASE("oracle-test accepts an echo child") {
  const auto r = run_cli({"oracle-test", "--command", "cat", "--input-dim",
                          "4", "--output-length", "4", "--probes", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("protocol: pass") != std::string::npos);

  const auto bad = run_cli({"oracle-test", "--command", "cat", "--input-dim",
                            "4", "--output-length", "5", "--probes", "1"});
  CHECK(bad.code != 0);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run_cli({"run", "--no-such-flag"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  testing::TempDir dir;
  testing::write_file(dir / "bad.ini", "[run]\nensemble_size = 1\n");
  const auto r = run_cli({"run", "--config", (dir / "bad.ini").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("run.ensemble_size") != std::string::npos);
}
