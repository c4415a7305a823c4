// SPDX-License-Identifier: Apache-2.0
#include "qbc/io/run_dir.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "qbc/errors.hpp"
#include "qbc/nn/checkpoint.hpp"
#include "qbc/orchestrator/training.hpp"

namespace qbc::io {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write '" + path.string() + "'");
  f << text;
}

std::string model_checkpoint(std::size_t m, const char* kind) {
  return "model_" + std::to_string(m) + "_" + kind + ".ckpt";
}

}  // namespace

RunDirectory::RunDirectory(fs::path root, const ConfigFile& config)
    : root_((fs::create_directories(root), root)),
      net_(nn::preset_by_name(config.run.preset, config.run.dimension())),
      dataset_(root_ / "dataset.jsonl"),
      metrics_(root_ / "metrics.csv") {
  fs::create_directories(root_ / "checkpoints");
  write_text(root_ / "config.ini", render_config(config));
}

void RunDirectory::on_instances(std::span<const orchestrator::Instance> batch) {
  dataset_.append(batch);
}

void RunDirectory::on_epoch(const orchestrator::EpochRecord& epoch) {
  const auto rows = metrics_rows(epoch);
  metrics_.append(rows);
}

void RunDirectory::on_best(std::size_t model, const nn::ModelState& state) {
  nn::save_checkpoint(root_ / "checkpoints" / model_checkpoint(model, "best"),
                      net_, state);
}

void write_labeled_points(const fs::path& path,
                          const std::vector<space::Point>& xs,
                          const orchestrator::LabeledSet& set,
                          const space::ParameterSpace& space) {
  std::vector<orchestrator::Instance> records;
  const std::size_t len = set.empty() ? 0 : set.y.extent(1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    orchestrator::Instance in;
    in.id = i;
    in.x = xs[i];
    in.x_physical = space.scale(xs[i]);
    in.y.assign(set.y.row(i), set.y.row(i) + len);
    records.push_back(std::move(in));
  }
  write_dataset(path, records);
}

void RunDirectory::write_reference_sets(
    const orchestrator::ActiveLearner& learner) {
  write_labeled_points(root_ / "validation.jsonl", learner.validation_points(),
                       learner.validation_set(), learner.parameter_space());
  write_labeled_points(root_ / "test.jsonl", learner.test_points(),
                       learner.test_set(), learner.parameter_space());
}

void RunDirectory::finish(const orchestrator::ActiveLearner& learner) {
  const auto& members = learner.members();
  for (std::size_t m = 0; m < members.size(); ++m)
    nn::save_checkpoint(root_ / "checkpoints" / model_checkpoint(m, "final"),
                        net_, members[m].state);
  nn::save_checkpoint(root_ / "checkpoints" / "best.ckpt", net_,
                      learner.reported_model());

  const auto& cfg = learner.config();
  json s = json::object();
  s["seed"] = cfg.seed;
  s["oracle"] = oracle::to_string(cfg.oracle.kind);
  s["epochs"] = learner.epochs().size();
  s["dataset_size"] = learner.dataset().size();
  s["occupied_blocks"] = learner.grid().occupied_blocks();
  s["block_total"] = learner.grid().block_total();
  s["member_step_budget"] = orchestrator::member_step_budget(cfg);
  s["best"] = {{"model", learner.best().model},
               {"epoch", learner.best().epoch},
               {"val_mse", learner.best().val_mse}};
  s["val_mse"] = learner.reported_val_mse();
  s["test_mse"] = learner.reported_test_mse();
  s["surprise_fraction"] = orchestrator::surprise_fraction(learner.epochs());
  if (const auto& r = learner.retrain()) {
    s["retrain"] = {{"epochs", r->val_mse.size()},
                    {"loaded_val_mse", r->loaded_val_mse},
                    {"final_val_mse", r->final_val_mse},
                    {"val_mse", r->val_mse}};
  }
  json epochs = json::array();
  for (const auto& e : learner.epochs())
    epochs.push_back({{"epoch", e.epoch},
                      {"blocks", e.blocks},
                      {"exploration", e.exploration},
                      {"added", e.added},
                      {"pre_train_mse", e.pre_train_mse}});
  s["epoch_log"] = std::move(epochs);
  write_text(root_ / "summary.json", s.dump(2) + "\n");
  replot_run(root_);
}

orchestrator::LabeledSet load_labeled_set(const fs::path& path) {
  const auto data = read_dataset(path);
  std::vector<std::size_t> rows(data.instances.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return orchestrator::gather(data.instances, rows);
}

PlotResult replot_run(const fs::path& run_dir, std::size_t overlay_count) {
  const auto metrics = read_metrics(run_dir / "metrics.csv");
  const auto dataset = read_dataset(run_dir / "dataset.jsonl");
  std::vector<SpectrumOverlay> overlays;
  const fs::path ckpt = run_dir / "checkpoints" / "best.ckpt";
  const fs::path test = run_dir / "test.jsonl";
  if (fs::exists(ckpt) && fs::exists(test)) {
    const auto cp = nn::load_checkpoint(ckpt);
    const nn::Network net(cp.config);
    const auto points = read_dataset(test).instances;
    for (std::size_t i = 0; i < points.size() && i < overlay_count; ++i) {
      std::string label = "test point " + std::to_string(i) + " (";
      for (std::size_t d = 0; d < points[i].x.size(); ++d) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%.3f", d ? ", " : "",
                      points[i].x[d]);
        label += buf;
      }
      overlays.push_back(
          {label + ")", points[i].y, net.forward(cp.state, points[i].x)});
    }
  }
  auto result =
      emit_plots(metrics, dataset.instances, overlays, run_dir / "plots");
  for (auto& w : dataset.warnings) result.warnings.push_back(w);
  return result;
}

fs::path default_output_dir(const std::string& name) {
  const char* root = std::getenv("QBC_OUTPUT_ROOT");
  return fs::path(root && *root ? root : "runs") / name;
}

}  // namespace qbc::io
