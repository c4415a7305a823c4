// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <regex>

#include "qbc/errors.hpp"
#include "qbc/io/config.hpp"
#include "qbc/io/dataset_log.hpp"
#include "qbc/io/metrics.hpp"
#include "qbc/io/plots.hpp"
#include "qbc/io/run_dir.hpp"
#include "support/small_run.hpp"
#include "support/temp_dir.hpp"

using namespace qbc;
using namespace qbc::io;
using orchestrator::Instance;
using orchestrator::SelectionMode;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, "t.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::vector<Instance> random_instances(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    Instance inst;
    inst.id = i;
    inst.epoch = i / 4;
    inst.x = {rng.uniform(), rng.uniform(), rng.uniform()};
    inst.x_physical = {inst.x[0] * 3.0 - 1.0, inst.x[1], 1e-300 * inst.x[2]};
    inst.y.resize(8);
    for (auto& v : inst.y) v = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-20, 20));
    inst.uncertainty = rng.uniform() / 3.0;
    inst.block = space::block_linear(space::block_index(inst.x, 2), 2);
    inst.mode = static_cast<SelectionMode>(i % 3);
    inst.explore_epoch = i % 5 == 0;
    out.push_back(inst);
  }
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("an empty config file yields the defaults") {
  const ConfigFile c = parse_config_text("", "empty.ini");
  CHECK(c.run == orchestrator::RunConfig{});
  CHECK(c.outdir.empty());
  CHECK(parse_config_text("# only a comment\n\n").run == orchestrator::RunConfig{});
}

TEST_CASE("render then parse is the identity") {
  ConfigFile c{testing::small_run_config(42), "out/dir"};
  c.run.gamma = 0.1 + 0.2;
  c.run.optimizer.learning_rate = 3.3e-4;
  c.run.acquisition.exploration_mode = acquisition::ExplorationMode::least_populated;
  c.run.acquisition.epsilon_scope = acquisition::EpsilonScope::per_instance;
  CHECK(parse_config_text(render_config(c)) == c);

  ConfigFile ext;
  ext.run.oracle.kind = oracle::OracleKind::external;
  ext.run.oracle.input_dim = 2;
  ext.run.oracle.external.command = {"python3", "my sim.py", "--flag"};
  ext.run.oracle.external.cache_path = "cache.bin";
  ext.run.space = {2, {{0.5, 2.0}, {-1.0, 1.0}}};
  CHECK(parse_config_text(render_config(ext)) == ext);

  CHECK(parse_config_text(render_config(ConfigFile{})) == ConfigFile{});
}

TEST_CASE("every documented key appears in the rendering with help") {
  const std::string text = render_config(ConfigFile{});
  for (const auto& k : config_keys()) {
    CAPTURE(k.name);
    CHECK(text.find("\n" + k.name + " = ") != std::string::npos);
    CHECK_FALSE(k.help.empty());
  }
}

TEST_CASE("config errors name the key and line") {
  const std::string e = config_error("[run]\nepochs = 10\nensemble_size = 1\n");
  CHECK(e.find("t.ini:3") != std::string::npos);
  CHECK(e.find("run.ensemble_size") != std::string::npos);

  CHECK(config_error("[run]\nepoch = 3\n").find("t.ini:2") != std::string::npos);
  CHECK(config_error("[nope]\n").find("nope") != std::string::npos);
  CHECK(config_error("epochs = 3\n").find("t.ini:1") != std::string::npos);
  CHECK(config_error("[run]\nepochs = 3\nepochs = 4\n").find("t.ini:3") !=
        std::string::npos);
  CHECK(config_error("[run]\nepochs = ten\n").find("run.epochs") !=
        std::string::npos);
  CHECK(config_error("[space]\ngamma = 1.5\n").find("space.gamma") !=
        std::string::npos);
  CHECK_FALSE(config_error("[oracle]\nkind = external\n").empty());
  CHECK_FALSE(config_error("[network]\npreset = paper-literal\n").empty());
  CHECK_FALSE(config_error("[run]\nrecent_window = 2\n").empty());
}

TEST_CASE("dataset log round-trips bitwise") {
  testing::TempDir dir;
  const auto path = dir / "d.jsonl";
  const auto instances = random_instances(1000, 5);
  write_dataset(path, instances);
  const auto back = read_dataset(path);
  CHECK(back.warnings.empty());
  REQUIRE(back.instances.size() == instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    CHECK(back.instances[i] == instances[i]);

  write_dataset(path, {});
  CHECK(testing::read_file(path).empty());
  CHECK(read_dataset(path).instances.empty());
}

TEST_CASE("appending writer matches the one-shot writer") {
  testing::TempDir dir;
  const auto instances = random_instances(20, 6);
  write_dataset(dir / "a.jsonl", instances);
  {
    DatasetWriter w(dir / "b.jsonl");
    w.append(std::span(instances).subspan(0, 7));
    w.append(std::span(instances).subspan(7));
    CHECK_THROWS_AS(w.append(std::span(instances).subspan(3, 1)), FormatError);
  }
  CHECK(testing::read_file(dir / "a.jsonl") == testing::read_file(dir / "b.jsonl"));
}

TEST_CASE("a truncated final line is dropped with a warning") {
  testing::TempDir dir;
  const auto path = dir / "d.jsonl";
  write_dataset(path, random_instances(10, 7));
  std::string text = testing::read_file(path);
  testing::write_file(path, text.substr(0, text.size() - 20));
  const auto r = read_dataset(path);
  CHECK(r.instances.size() == 9);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("malformed or out-of-order records are rejected with a line number") {
  testing::TempDir dir;
  const auto path = dir / "d.jsonl";
  const auto inst = random_instances(3, 8);
  std::string text = instance_to_json(inst[0]) + "\n{\"id\": oops}\n" +
                     instance_to_json(inst[2]) + "\n";
  testing::write_file(path, text);
  try {
    read_dataset(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  testing::write_file(path, instance_to_json(inst[1]) + "\n" +
                                instance_to_json(inst[0]) + "\n");
  CHECK_THROWS_AS(read_dataset(path), FormatError);
  CHECK_THROWS_AS(instance_from_json("{\"id\": 1}"), FormatError);
}

TEST_CASE("logged instances rebuild the same grid") {
  testing::TempDir dir;
  const auto instances = random_instances(200, 9);
  write_dataset(dir / "d.jsonl", instances);
  const auto back = read_dataset(dir / "d.jsonl").instances;
  CHECK(orchestrator::rebuild_grid(back, 3, 2) ==
        orchestrator::rebuild_grid(instances, 3, 2));
}

TEST_CASE("metrics round-trip") {
  testing::TempDir dir;
  orchestrator::EpochRecord r;
  r.epoch = 4;
  r.epsilon = 0.1 + 0.2;
  r.exploration = true;
  r.dataset_size = 52;
  r.models = {{1.0 / 3.0, 2e-5}, {0.25, 7.5e-3}, {1e-300, 4.0}};
  r.wall_s = 12.5;
  const auto rows = metrics_rows(r);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].model == 2);
  {
    MetricsWriter w(dir / "m.csv");
    w.append(rows);
  }
  const std::string text = testing::read_file(dir / "m.csv");
  CHECK(text.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  CHECK(read_metrics(dir / "m.csv") == rows);
}

TEST_CASE("a three-model run plots six labelled loss series") {
  testing::TempDir dir;
  std::vector<MetricsRow> rows;
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t m = 0; m < 3; ++m)
      rows.push_back({t, m, 0.1 / (t + 1 + m), 0.2 / (t + 1), 0.5, t == 0,
                      32 + 4 * (t + 1), 0.0});
  const auto instances = random_instances(52, 10);
  std::vector<SpectrumOverlay> overlays{{"probe", {0, 1, 2}, {0, 1, 2}}};
  const auto r = emit_plots(rows, instances, overlays, dir.path());
  CHECK(r.warnings.empty());
  CHECK(r.files.size() == 3);
  const std::string loss = testing::read_file(dir / "loss.svg");
  CHECK(count(loss, "class=\"series\"") == 6);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(loss.find("data-label=\"model " + std::to_string(m) + " train\"") !=
          std::string::npos);
    CHECK(loss.find("data-label=\"model " + std::to_string(m) + " val\"") !=
          std::string::npos);
  }
  // A perfect prediction draws the same path twice.
  const std::string spectra = testing::read_file(dir / "spectra.svg");
  std::regex path_re("data-label=\"[^\"]*\" d=\"([^\"]*)\"");
  std::vector<std::string> paths;
  for (auto it = std::sregex_iterator(spectra.begin(), spectra.end(), path_re);
       it != std::sregex_iterator(); ++it)
    paths.push_back((*it)[1]);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0] == paths[1]);

  testing::TempDir again;
  emit_plots(rows, instances, overlays, again.path());
  for (const char* f : {"loss.svg", "dataset.svg", "spectra.svg"})
    CHECK(testing::read_file(dir / f) == testing::read_file(again / f));

  testing::TempDir empty;
  const auto none = emit_plots({}, {}, {}, empty.path());
  CHECK(none.files.empty());
  CHECK(none.warnings.size() == 1);
}
