// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "qbc/nn/network.hpp"
#include "qbc/oracle/oracle.hpp"
#include "qbc/orchestrator/config.hpp"
#include "qbc/orchestrator/dataset.hpp"
#include "qbc/orchestrator/training.hpp"
#include "qbc/space/space.hpp"

namespace qbc::orchestrator {

/// Per-model figures for one algorithm epoch.
struct ModelEpoch {
  double train_mse = 0.0;  // recent window, after training
  double val_mse = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double epsilon = 0.0;
  bool exploration = false;
  std::vector<std::size_t> blocks;
  std::size_t added = 0;
  std::size_t dataset_size = 0;
  /// Mean over models of the recent-window MSE after acquisition and before
  /// training.
  double pre_train_mse = 0.0;
  std::vector<ModelEpoch> models;
  double wall_s = 0.0;  // since the run started; 0 in deterministic mode
};

struct BestModel {
  std::size_t model = 0;
  std::size_t epoch = 0;
  double val_mse = 0.0;
};

struct RetrainRecord {
  double loaded_val_mse = 0.0;
  std::vector<double> val_mse;  // after each retrain epoch
  double final_val_mse = 0.0;   // of the returned weights
};

/// Receives durable events as the run progresses.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_instances(std::span<const Instance>) {}
  virtual void on_epoch(const EpochRecord&) {}
  /// A member's best-validation weights changed.
  virtual void on_best(std::size_t /*model*/, const nn::ModelState&) {}
};

/// Fraction of epochs t >= 1 whose pre-training recent-window loss exceeds
/// epoch t - 1's post-training loss (averaged over models).
double surprise_fraction(std::span<const EpochRecord> epochs);

/// Algorithm 1: seeding, the acquire/label/train epoch loop, best-weight
/// tracking and the final retrain.
class ActiveLearner {
 public:
  ActiveLearner(RunConfig config, oracle::Oracle& oracle,
                RunObserver* observer = nullptr,
                std::ostream* progress = nullptr);

  /// Builds the grid, labels the seed set, validation and test sets, and
  /// trains every member on the seeds. OracleError propagates.
  void initialize();

  /// One epoch (the next one). On an oracle failure the learner is restored
  /// to its state before the call and the error is rethrown.
  const EpochRecord& run_epoch();

  /// Loads the overall best weights, trains them for F passes over the full
  /// dataset and keeps the pass with the lowest validation loss. F = 0
  /// leaves the best weights as they are.
  RetrainRecord final_retrain(std::size_t epochs);

  /// initialize, all epochs, final retrain.
  void run();

  /// Weights the run reports: the retrained ones after final_retrain, the
  /// overall best otherwise.
  const nn::ModelState& reported_model() const;
  double reported_test_mse() const;
  double reported_val_mse() const;

  const RunConfig& config() const noexcept { return config_; }
  const nn::Network& network() const noexcept { return *net_; }
  const space::ParameterSpace& parameter_space() const noexcept {
    return space_;
  }
  const space::BlockGrid& grid() const noexcept { return grid_; }
  const std::vector<Instance>& dataset() const noexcept { return dataset_; }
  const std::vector<Member>& members() const noexcept { return members_; }
  const std::vector<EpochRecord>& epochs() const noexcept { return epochs_; }
  const LabeledSet& validation_set() const noexcept { return validation_; }
  const LabeledSet& test_set() const noexcept { return test_; }
  const std::vector<space::Point>& validation_points() const noexcept {
    return validation_points_;
  }
  const std::vector<space::Point>& test_points() const noexcept {
    return test_points_;
  }
  std::size_t next_epoch() const noexcept { return t_; }
  bool initialized() const noexcept { return initialized_; }

  const BestModel& best() const noexcept { return best_; }
  const nn::ModelState& best_state(std::size_t model) const;
  double best_val_mse(std::size_t model) const;
  const std::optional<RetrainRecord>& retrain() const noexcept {
    return retrain_;
  }

  /// Disagreement of the current committee at each row of x (N x n).
  std::vector<double> disagreement(const nn::Array& x) const;

 private:
  std::size_t worker_threads() const;
  std::vector<std::vector<double>> label(const std::vector<space::Point>& xs);
  LabeledSet recent_window() const;
  LabeledSet full_dataset() const;
  void train_all(const LabeledSet& data, std::size_t steps);
  void update_best(std::size_t epoch, std::span<const double> val);
  double elapsed() const;

  RunConfig config_;
  oracle::Oracle& oracle_;
  RunObserver* observer_;
  std::ostream* progress_;
  std::unique_ptr<nn::Network> net_;
  space::ParameterSpace space_;
  space::BlockGrid grid_;
  Rng rng_{0};
  std::vector<Member> members_;
  std::vector<Instance> dataset_;
  std::vector<EpochRecord> epochs_;
  std::vector<space::Point> validation_points_;
  std::vector<space::Point> test_points_;
  LabeledSet validation_;
  LabeledSet test_;
  std::vector<nn::ModelState> best_states_;
  std::vector<double> best_vals_;
  std::vector<std::size_t> best_epochs_;
  BestModel best_;
  std::optional<RetrainRecord> retrain_;
  std::optional<nn::ModelState> retrained_;
  std::size_t t_ = 0;
  bool initialized_ = false;
  double start_ = 0.0;
};

enum class BaselineStrategy { uniform, lhs };

std::string to_string(BaselineStrategy s);
BaselineStrategy baseline_strategy_from_string(const std::string& s);

struct BaselineResult {
  nn::ModelState model;       // lowest-validation weights
  std::vector<Instance> dataset;
  std::size_t steps = 0;
  std::vector<std::size_t> checked_steps;
  std::vector<double> val_mse;  // at each checked step
  double best_val_mse = 0.0;
  double test_mse = 0.0;
};

/// Interval, in steps, between baseline validation checks.
inline constexpr std::size_t kBaselineValidationInterval = 50;

/// Labels `budget` points drawn by `strategy` and trains one model for
/// `steps` mini-batch steps, validating every kBaselineValidationInterval
/// steps and at the end. Validation and test sets are the ones an active
/// run with the same config and seed uses.
BaselineResult run_baseline(const RunConfig& config, oracle::Oracle& oracle,
                            std::size_t budget, BaselineStrategy strategy,
                            std::size_t steps,
                            std::ostream* progress = nullptr);

/// Validation and test points for a config and seed.
std::vector<space::Point> validation_points(const RunConfig& config);
std::vector<space::Point> test_points(const RunConfig& config);

}  // namespace qbc::orchestrator
