// SPDX-License-Identifier: Apache-2.0
#include "qbc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbc/errors.hpp"
#include "qbc/io/config.hpp"
#include "qbc/io/run_dir.hpp"
#include "qbc/nn/checkpoint.hpp"
#include "qbc/oracle/subprocess.hpp"
#include "qbc/orchestrator/learner.hpp"

namespace qbc::cli {
namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string outdir;
  std::string oracle;
  bool deterministic = false;
  std::size_t threads = 0;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "configuration file (INI)");
  app->add_option("--seed", f.seed, "master seed (overrides the config)");
  app->add_option("--outdir", f.outdir, "output directory");
  app->add_option("--oracle", f.oracle, "oracle kind")
      ->check(CLI::IsMember({"synthetic3", "synthetic10", "external"}));
  app->add_flag("--deterministic", f.deterministic,
                "single-threaded, byte-identical outputs");
  app->add_option("--threads", f.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

io::ConfigFile resolve(const CommonFlags& f, CLI::App* app) {
  io::ConfigFile c = f.config.empty() ? io::parse_config_text("")
                                      : io::parse_config(f.config);
  if (app->count("--seed")) c.run.seed = f.seed;
  if (!f.oracle.empty()) {
    c.run.oracle.kind = oracle::oracle_kind_from_string(f.oracle);
    if (c.run.oracle.kind != oracle::OracleKind::external)
      c.run.oracle.input_dim = c.run.oracle.dimension();
  }
  if (f.deterministic) c.run.deterministic = true;
  if (app->count("--threads")) c.run.threads = f.threads;
  // Round-trip through the text form so overrides meet the same checks.
  c = io::parse_config_text(io::render_config(c), "resolved configuration");
  return c;
}

fs::path output_dir(const CommonFlags& f, const io::ConfigFile& c,
                    const std::string& kind) {
  if (!f.outdir.empty()) return f.outdir;
  if (!c.outdir.empty()) return c.outdir;
  return io::default_output_dir(kind + "-" +
                                oracle::to_string(c.run.oracle.kind) +
                                "-seed" + std::to_string(c.run.seed));
}

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_run(const CommonFlags& f, CLI::App* app, std::ostream& out,
            std::ostream& err) {
  const io::ConfigFile c = resolve(f, app);
  const fs::path dir = output_dir(f, c, "run");
  auto oracle = oracle::make_oracle(c.run.oracle, c.run.resolved_space());
  io::ConfigFile echo = c;
  echo.outdir = dir.string();
  io::RunDirectory rd(dir, echo);
  orchestrator::ActiveLearner learner(c.run, *oracle, &rd, &err);
  learner.initialize();
  rd.write_reference_sets(learner);
  while (learner.next_epoch() < c.run.epochs) learner.run_epoch();
  learner.final_retrain(c.run.final_retrain_epochs);
  rd.finish(learner);
  out << "run directory: " << dir.string() << "\n";
  out << "dataset_size=" << learner.dataset().size() << "\n";
  out << "best_model=" << learner.best().model
      << " best_epoch=" << learner.best().epoch << "\n";
  out << "val_mse=" << real(learner.reported_val_mse()) << "\n";
  out << "test_mse=" << real(learner.reported_test_mse()) << "\n";
  return 0;
}

int cmd_baseline(const CommonFlags& f, CLI::App* app,
                 const std::string& strategy_name, std::size_t budget,
                 std::size_t steps, std::ostream& out, std::ostream& err) {
  const io::ConfigFile c = resolve(f, app);
  const auto strategy =
      orchestrator::baseline_strategy_from_string(strategy_name);
  if (!app->count("--budget")) budget = orchestrator::final_dataset_size(c.run);
  if (!app->count("--steps")) steps = orchestrator::member_step_budget(c.run);
  const fs::path dir = output_dir(f, c, "baseline-" + strategy_name);
  fs::create_directories(dir / "checkpoints");
  io::ConfigFile echo = c;
  echo.outdir = dir.string();
  {
    std::ofstream cfg(dir / "config.ini", std::ios::binary);
    cfg << io::render_config(echo);
  }
  auto oracle = oracle::make_oracle(c.run.oracle, c.run.resolved_space());
  const auto r = orchestrator::run_baseline(c.run, *oracle, budget, strategy,
                                            steps, &err);
  const auto space = c.run.resolved_space();
  io::write_dataset(dir / "dataset.jsonl", r.dataset);
  const auto vp = orchestrator::validation_points(c.run);
  const auto tp = orchestrator::test_points(c.run);
  io::write_labeled_points(dir / "validation.jsonl", vp,
                           orchestrator::make_labeled_set(
                               vp, oracle->evaluate_many(vp)),
                           space);
  io::write_labeled_points(dir / "test.jsonl", tp,
                           orchestrator::make_labeled_set(
                               tp, oracle->evaluate_many(tp)),
                           space);
  const auto net = nn::preset_by_name(c.run.preset, c.run.dimension());
  nn::save_checkpoint(dir / "checkpoints" / "best.ckpt", net, r.model);
  {
    std::ofstream csv(dir / "baseline.csv", std::ios::binary);
    csv << "step,val_mse\n";
    for (std::size_t i = 0; i < r.checked_steps.size(); ++i)
      csv << r.checked_steps[i] << "," << real(r.val_mse[i]) << "\n";
  }
  nlohmann::json s = {{"strategy", strategy_name},
                      {"budget", budget},
                      {"steps", r.steps},
                      {"seed", c.run.seed},
                      {"best_val_mse", r.best_val_mse},
                      {"test_mse", r.test_mse}};
  {
    std::ofstream sj(dir / "summary.json", std::ios::binary);
    sj << s.dump(2) << "\n";
  }
  out << "baseline directory: " << dir.string() << "\n";
  out << "val_mse=" << real(r.best_val_mse) << "\n";
  out << "test_mse=" << real(r.test_mse) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& dataset,
                 std::ostream& out) {
  const auto cp = nn::load_checkpoint(checkpoint);
  const nn::Network net(cp.config);
  const auto data = io::read_dataset(dataset);
  std::vector<std::size_t> rows(data.instances.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto set = orchestrator::gather(data.instances, rows);
  if (set.empty()) throw FormatError("dataset '" + dataset + "' is empty");
  if (set.x.extent(1) != cp.config.input_dim ||
      set.y.extent(1) != net.output_length())
    throw DimensionError("dataset shape does not match the checkpoint");
  out << "instances=" << set.size() << "\n";
  out << "mse=" << real(orchestrator::evaluate(net, cp.state, set)) << "\n";
  return 0;
}

int cmd_plot(const std::string& run_dir, std::ostream& out,
             std::ostream& err) {
  const auto r = io::replot_run(run_dir);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  for (const auto& f : r.files) out << f.string() << "\n";
  return 0;
}

int cmd_oracle_test(const CommonFlags& f, CLI::App* app,
                    const std::string& command, std::size_t input_dim,
                    std::size_t output_length, double timeout_s,
                    std::size_t probes, std::ostream& out) {
  oracle::ExternalOracleConfig ext;
  space::ParameterSpace space;
  if (!f.config.empty()) {
    const auto c = io::parse_config(f.config);
    ext = c.run.oracle.external;
    input_dim = c.run.oracle.input_dim;
    output_length = c.run.oracle.output_length;
    space = c.run.resolved_space();
  }
  if (!command.empty()) ext.command = oracle::split_command_line(command);
  if (app->count("--timeout")) ext.timeout_s = timeout_s;
  if (ext.command.empty()) throw ConfigError("oracle-test needs --command");
  if (space.n == 0 || space.n != input_dim)
    space = space::ParameterSpace::unit(input_dim);
  ext.validate();
  ext.cache_path.clear();

  out << "command: " << oracle::join_command_line(ext.command) << "\n";
  bool pass = true;
  Rng rng(f.seed);
  const auto timeout = std::chrono::milliseconds(
      static_cast<long long>(std::ceil(ext.timeout_s * 1000.0)));
  for (std::size_t p = 0; p < probes; ++p) {
    space::Point u(input_dim);
    for (auto& v : u) v = space::uniform_half_open(0.0, 1.0, rng);
    const auto phys = space.scale(u);
    const std::string request = oracle::render_request_line(phys);
    std::string verdict = "ok";
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const auto a = oracle::run_child(ext.command, request, timeout);
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      if (a.timed_out) throw OracleError("timed out");
      if (a.signal) throw OracleError("killed by signal " + std::to_string(a.signal));
      if (a.exit_code != 0)
        throw OracleError("exit code " + std::to_string(a.exit_code) +
                          (a.err.empty() ? "" : ": " + a.err.substr(0, 200)));
      const auto y = oracle::parse_spectrum_line(a.out, output_length);
      if (a.out.empty() || a.out.back() != '\n')
        throw OracleError("response is not newline-terminated");
      if (a.out.find('\n') + 1 != a.out.size())
        throw OracleError("response has more than one line");
      const auto b = oracle::run_child(ext.command, request, timeout);
      if (b.exit_code != 0 || b.out != a.out)
        throw OracleError("second identical request gave a different response");
      char buf[96];
      std::snprintf(buf, sizeof buf, "ok (%zu values, %.3f s, repeatable)",
                    y.size(), secs);
      verdict = buf;
    } catch (const std::exception& e) {
      verdict = std::string("FAIL: ") + e.what();
      pass = false;
    }
    out << "probe " << p << ": " << verdict << "\n";
  }
  out << "protocol: " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Query-by-committee active learning for spectrum surrogates",
               "qbc"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "active learning run");
  add_common(run, run_flags);

  CommonFlags base_flags;
  std::string strategy = "uniform";
  std::size_t budget = 0;
  std::size_t steps = 0;
  auto* baseline = app.add_subcommand("baseline", "equal-budget control");
  add_common(baseline, base_flags);
  baseline->add_option("--strategy", strategy, "uniform or lhs")
      ->check(CLI::IsMember({"uniform", "lhs"}));
  baseline->add_option("--budget", budget,
                       "labelled points (default: final active size)")
      ->check(CLI::PositiveNumber);
  baseline->add_option("--steps", steps,
                       "optimizer steps (default: one member's budget)");

  std::string checkpoint, dataset;
  auto* evaluate = app.add_subcommand("evaluate", "checkpoint MSE on a dataset");
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--dataset", dataset, "dataset log (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string run_dir;
  auto* plot = app.add_subcommand("plot", "re-emit plots of a run directory");
  plot->add_option("--run", run_dir, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  CommonFlags probe_flags;
  std::string command;
  std::size_t input_dim = 3, output_length = 64, probes = 3;
  double timeout_s = 60.0;
  auto* probe = app.add_subcommand("oracle-test",
                                   "check an external oracle's protocol");
  probe->add_option("--config", probe_flags.config,
                    "take the [oracle] and [space] sections from a config");
  probe->add_option("--command", command, "program and arguments");
  probe->add_option("--input-dim", input_dim, "parameters per request")
      ->check(CLI::PositiveNumber);
  probe->add_option("--output-length", output_length, "values per response")
      ->check(CLI::PositiveNumber);
  probe->add_option("--timeout", timeout_s, "seconds per request")
      ->check(CLI::PositiveNumber);
  probe->add_option("--probes", probes, "random requests to send")
      ->check(CLI::PositiveNumber);
  probe->add_option("--seed", probe_flags.seed, "seed for probe points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    if (*run) return cmd_run(run_flags, run, out, err);
    if (*baseline)
      return cmd_baseline(base_flags, baseline, strategy, budget, steps, out,
                          err);
    if (*evaluate) return cmd_evaluate(checkpoint, dataset, out);
    if (*plot) return cmd_plot(run_dir, out, err);
    if (*probe)
      return cmd_oracle_test(probe_flags, probe, command, input_dim,
                             output_length, timeout_s, probes, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    err << "error: " << msg << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qbc::cli
