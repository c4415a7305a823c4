// SPDX-License-Identifier: Apache-2.0
#pragma once

// Layout of a run directory:
//
//   config.ini                 resolved configuration
//   dataset.jsonl              acquired instances, appended per epoch
//   metrics.csv                one row per (epoch, model)
//   validation.jsonl, test.jsonl
//   checkpoints/model_<i>_best.ckpt, model_<i>_final.ckpt, best.ckpt
//   summary.json
//   plots/*.svg

#include <filesystem>
#include <memory>
#include <string>

#include "qbc/io/config.hpp"
#include "qbc/io/dataset_log.hpp"
#include "qbc/io/metrics.hpp"
#include "qbc/io/plots.hpp"
#include "qbc/orchestrator/learner.hpp"

namespace qbc::io {

/// Writes the durable artifacts of an active run as it progresses.
class RunDirectory final : public orchestrator::RunObserver {
 public:
  RunDirectory(std::filesystem::path root, const ConfigFile& config);

  const std::filesystem::path& root() const noexcept { return root_; }

  void on_instances(std::span<const orchestrator::Instance> batch) override;
  void on_epoch(const orchestrator::EpochRecord& epoch) override;
  void on_best(std::size_t model, const nn::ModelState& state) override;

  /// validation.jsonl and test.jsonl; call after initialize().
  void write_reference_sets(const orchestrator::ActiveLearner& learner);

  /// Final checkpoints, summary.json and plots; call after run().
  void finish(const orchestrator::ActiveLearner& learner);

 private:
  std::filesystem::path root_;
  nn::NetworkConfig net_;
  DatasetWriter dataset_;
  MetricsWriter metrics_;
};

/// Labeled points as instance records (mode seed, id = row).
void write_labeled_points(const std::filesystem::path& path,
                          const std::vector<space::Point>& xs,
                          const orchestrator::LabeledSet& set,
                          const space::ParameterSpace& space);

/// Inputs and targets of a dataset log, in file order.
orchestrator::LabeledSet load_labeled_set(const std::filesystem::path& path);

/// Re-emits the plots of a finished run from its files alone.
PlotResult replot_run(const std::filesystem::path& run_dir,
                      std::size_t overlay_count = 4);

/// Default run location: $QBC_OUTPUT_ROOT (or "runs") / <name>.
std::filesystem::path default_output_dir(const std::string& name);

}  // namespace qbc::io
