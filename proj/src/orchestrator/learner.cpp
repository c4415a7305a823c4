// SPDX-License-Identifier: Apache-2.0
#include "qbc/orchestrator/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "qbc/acquisition/acquisition.hpp"
#include "qbc/errors.hpp"

namespace qbc::orchestrator {
namespace {

// Sub-seed streams derived from the master seed.
enum Stream : std::uint64_t {
  kSeedSet = 1,
  kValidation = 2,
  kTest = 3,
  kAcquisition = 4,
  kRetrain = 5,
  kBaselinePoints = 6,
  kBaselineInit = 7,
  kBaselineTrain = 8,
  kMemberInit = 100,
  kMemberTrain = 200,
};

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<space::Point> uniform_points(std::size_t count, std::size_t n,
                                         Rng& rng) {
  std::vector<space::Point> out(count, space::Point(n));
  for (auto& x : out)
    for (auto& v : x) v = space::uniform_half_open(0.0, 1.0, rng);
  return out;
}

std::vector<std::vector<double>> label_points(
    oracle::Oracle& oracle, const std::vector<space::Point>& xs) {
  return oracle.evaluate_many(xs);
}

LabeledSet labeled(oracle::Oracle& oracle, const std::vector<space::Point>& xs) {
  return make_labeled_set(xs, label_points(oracle, xs));
}

nn::Array stack(const std::vector<space::Point>& xs, std::size_t n) {
  nn::Array a({xs.size(), n});
  for (std::size_t i = 0; i < xs.size(); ++i)
    std::copy(xs[i].begin(), xs[i].end(), a.row(i));
  return a;
}

void check_oracle(const RunConfig& config, const oracle::Oracle& oracle,
                  const nn::Network& net) {
  if (oracle.input_dim() != config.dimension())
    throw ConfigError("oracle takes " + std::to_string(oracle.input_dim()) +
                      " parameters, config declares " +
                      std::to_string(config.dimension()));
  if (oracle.output_length() != net.output_length())
    throw ConfigError("oracle output length " +
                      std::to_string(oracle.output_length()) +
                      " does not match the network output length " +
                      std::to_string(net.output_length()));
}

}  // namespace

std::vector<space::Point> validation_points(const RunConfig& config) {
  Rng rng(derive_seed(config.seed, kValidation));
  return uniform_points(config.validation_size, config.dimension(), rng);
}

std::vector<space::Point> test_points(const RunConfig& config) {
  Rng rng(derive_seed(config.seed, kTest));
  return uniform_points(config.test_size, config.dimension(), rng);
}

double surprise_fraction(std::span<const EpochRecord> epochs) {
  if (epochs.size() < 2) return 0.0;
  std::size_t surprised = 0;
  for (std::size_t t = 1; t < epochs.size(); ++t) {
    double prev = 0.0;
    for (const auto& m : epochs[t - 1].models) prev += m.train_mse;
    prev /= static_cast<double>(epochs[t - 1].models.size());
    if (epochs[t].pre_train_mse > prev) ++surprised;
  }
  return static_cast<double>(surprised) /
         static_cast<double>(epochs.size() - 1);
}

// ---- ActiveLearner ------------------------------------------------------------

ActiveLearner::ActiveLearner(RunConfig config, oracle::Oracle& oracle,
                             RunObserver* observer, std::ostream* progress)
    : config_(std::move(config)), oracle_(oracle), observer_(observer),
      progress_(progress) {
  config_.validate();
  net_ = std::make_unique<nn::Network>(
      nn::preset_by_name(config_.preset, config_.dimension()));
  check_oracle(config_, oracle_, *net_);
  space_ = config_.resolved_space();
}

std::size_t ActiveLearner::worker_threads() const {
  return config_.deterministic ? 1 : config_.threads;
}

double ActiveLearner::elapsed() const {
  return config_.deterministic ? 0.0 : now_s() - start_;
}

std::vector<std::vector<double>> ActiveLearner::label(
    const std::vector<space::Point>& xs) {
  return label_points(oracle_, xs);
}

void ActiveLearner::initialize() {
  if (initialized_) throw ConfigError("learner already initialized");
  start_ = now_s();
  const std::size_t n = config_.dimension();
  grid_ = space::BlockGrid(n, config_.partitions);
  rng_ = Rng(derive_seed(config_.seed, kAcquisition));

  Rng seed_rng(derive_seed(config_.seed, kSeedSet));
  const auto seeds = space::lhs_sample(config_.init_size, n, seed_rng);
  const auto ys = label(seeds);
  validation_points_ = orchestrator::validation_points(config_);
  test_points_ = orchestrator::test_points(config_);
  validation_ = labeled(oracle_, validation_points_);
  test_ = labeled(oracle_, test_points_);

  dataset_.clear();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Instance in;
    in.id = i;
    in.epoch = 0;
    in.x = seeds[i];
    in.x_physical = space_.scale(seeds[i]);
    in.y = ys[i];
    in.uncertainty = 0.0;
    in.block = grid_.record(in.x, 0.0, 0);
    in.mode = SelectionMode::seed;
    dataset_.push_back(std::move(in));
  }
  if (observer_) observer_->on_instances(dataset_);

  members_.clear();
  for (std::size_t i = 0; i < config_.ensemble_size; ++i) {
    Member m;
    m.state = net_->initialize(derive_seed(config_.seed, kMemberInit + i));
    m.rng = Rng(derive_seed(config_.seed, kMemberTrain + i));
    members_.push_back(std::move(m));
  }
  train_all(full_dataset(), config_.init_train_steps);

  best_states_.assign(members_.size(), nn::ModelState{});
  best_vals_.assign(members_.size(), std::numeric_limits<double>::infinity());
  best_epochs_.assign(members_.size(), 0);
  best_ = BestModel{0, 0, std::numeric_limits<double>::infinity()};
  epochs_.clear();
  retrain_.reset();
  retrained_.reset();
  t_ = 0;
  initialized_ = true;
}

std::vector<double> ActiveLearner::disagreement(const nn::Array& x) const {
  const std::size_t rows = x.extent(0);
  std::vector<nn::Array> preds(members_.size());
  parallel_for(members_.size(), worker_threads(), [&](std::size_t i) {
    preds[i] = predict(*net_, members_[i].state, x);
  });
  const std::size_t len = net_->output_length();
  std::vector<double> u(rows);
  std::vector<std::vector<double>> outs(members_.size(),
                                        std::vector<double>(len));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < members_.size(); ++i)
      std::copy_n(preds[i].row(r), len, outs[i].begin());
    u[r] = acquisition::ensemble_disagreement(
        outs, config_.acquisition.sample_variance);
  }
  return u;
}

LabeledSet ActiveLearner::recent_window() const {
  const std::size_t count = std::min(config_.recent_window, dataset_.size());
  std::vector<std::size_t> rows(count);
  for (std::size_t i = 0; i < count; ++i)
    rows[i] = dataset_.size() - count + i;
  return gather(dataset_, rows);
}

LabeledSet ActiveLearner::full_dataset() const {
  std::vector<std::size_t> rows(dataset_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return gather(dataset_, rows);
}

void ActiveLearner::train_all(const LabeledSet& data, std::size_t steps) {
  parallel_for(members_.size(), worker_threads(), [&](std::size_t i) {
    train_member(*net_, members_[i], data, steps, config_.batch_size,
                 config_.optimizer);
  });
}

void ActiveLearner::update_best(std::size_t epoch,
                                std::span<const double> val) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (val[i] < best_vals_[i]) {
      best_vals_[i] = val[i];
      best_states_[i] = members_[i].state;
      best_epochs_[i] = epoch;
      if (observer_) observer_->on_best(i, best_states_[i]);
    }
  }
  std::size_t m = 0;
  for (std::size_t i = 1; i < members_.size(); ++i)
    if (best_vals_[i] < best_vals_[m]) m = i;
  best_ = BestModel{m, best_epochs_[m], best_vals_[m]};
}

const EpochRecord& ActiveLearner::run_epoch() {
  if (!initialized_) throw ConfigError("run_epoch before initialize");
  const std::size_t t = t_;
  const auto& acq = config_.acquisition;
  const std::size_t n = config_.dimension();
  const Rng rng_before = rng_;

  EpochRecord rec;
  rec.epoch = t;
  rec.epsilon = acquisition::epsilon_at(config_.epsilon, t);

  std::vector<Instance> fresh;
  try {
    const auto choice =
        acquisition::choose_blocks(grid_, acq, t, config_.gamma, rng_);
    rec.blocks = choice.blocks;
    rec.exploration = choice.exploration;
    const auto candidates = acquisition::generate_candidates(
        choice.blocks, acq.candidates_per_block, n, config_.partitions, rng_);
    std::vector<space::Point> xs;
    xs.reserve(candidates.size());
    for (const auto& c : candidates) xs.push_back(c.x);
    const auto u = disagreement(stack(xs, n));
    const auto pick = acquisition::choose_instances(
        u, acq.additions_per_epoch, rec.epsilon, acq.epsilon_scope, rng_);

    std::vector<space::Point> chosen;
    for (std::size_t idx : pick.indices) chosen.push_back(xs[idx]);
    const auto ys = label(chosen);

    for (std::size_t j = 0; j < pick.indices.size(); ++j) {
      const std::size_t idx = pick.indices[j];
      Instance in;
      in.id = dataset_.size() + j;
      in.epoch = t;
      in.x = xs[idx];
      in.x_physical = space_.scale(in.x);
      in.y = ys[j];
      in.uncertainty = u[idx];
      in.block = candidates[idx].block;
      in.mode = pick.random[j] ? SelectionMode::explore_random
                               : SelectionMode::exploit;
      in.explore_epoch = choice.exploration;
      fresh.push_back(std::move(in));
    }
  } catch (...) {
    // Nothing but the acquisition stream has changed yet.
    rng_ = rng_before;
    throw;
  }

  for (auto& in : fresh) {
    const std::size_t b = grid_.record(in.x, in.uncertainty, t);
    if (b != in.block)
      throw DomainError("candidate escaped its source block");
    dataset_.push_back(in);
  }
  if (observer_) observer_->on_instances(fresh);
  rec.added = fresh.size();
  rec.dataset_size = dataset_.size();

  const LabeledSet recent = recent_window();
  std::vector<double> pre(members_.size());
  parallel_for(members_.size(), worker_threads(), [&](std::size_t i) {
    pre[i] = evaluate(*net_, members_[i].state, recent);
  });
  for (double v : pre) rec.pre_train_mse += v;
  rec.pre_train_mse /= static_cast<double>(members_.size());

  train_all(recent, config_.train_steps_per_epoch);
  if (t % config_.full_train_period == 0)
    train_all(full_dataset(), config_.train_steps_per_epoch);

  rec.models.resize(members_.size());
  std::vector<double> val(members_.size());
  parallel_for(members_.size(), worker_threads(), [&](std::size_t i) {
    rec.models[i].train_mse = evaluate(*net_, members_[i].state, recent);
    rec.models[i].val_mse = evaluate(*net_, members_[i].state, validation_);
    val[i] = rec.models[i].val_mse;
  });
  update_best(t, val);
  rec.wall_s = elapsed();

  epochs_.push_back(std::move(rec));
  ++t_;
  const EpochRecord& done = epochs_.back();
  if (observer_) observer_->on_epoch(done);
  if (progress_) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "epoch %zu/%zu size=%zu eps=%.4f explore=%d best=%zu:%.4e "
                  "val=",
                  t + 1, config_.epochs, done.dataset_size, done.epsilon,
                  done.exploration ? 1 : 0, best_.model, best_.val_mse);
    *progress_ << line;
    for (std::size_t i = 0; i < done.models.size(); ++i) {
      std::snprintf(line, sizeof line, "%s%.4e", i ? "," : "",
                    done.models[i].val_mse);
      *progress_ << line;
    }
    *progress_ << '\n' << std::flush;
  }
  return done;
}

const nn::ModelState& ActiveLearner::best_state(std::size_t model) const {
  return best_states_.at(model);
}

double ActiveLearner::best_val_mse(std::size_t model) const {
  return best_vals_.at(model);
}

RetrainRecord ActiveLearner::final_retrain(std::size_t epochs) {
  if (epochs_.empty())
    throw ConfigError("final retrain needs at least one completed epoch");
  RetrainRecord out;
  Member m;
  m.state = best_states_[best_.model];
  m.rng = Rng(derive_seed(config_.seed, kRetrain));
  out.loaded_val_mse = evaluate(*net_, m.state, validation_);
  if (epochs == 0) {
    out.final_val_mse = out.loaded_val_mse;
    retrained_ = m.state;
    retrain_ = out;
    return out;
  }
  const LabeledSet full = full_dataset();
  nn::ModelState best_state;
  double best_val = std::numeric_limits<double>::infinity();
  train_member_epochs(*net_, m, full, epochs, config_.batch_size,
                      config_.optimizer, [&](std::size_t e) {
                        const double v = evaluate(*net_, m.state, validation_);
                        out.val_mse.push_back(v);
                        if (v < best_val) {
                          best_val = v;
                          best_state = m.state;
                        }
                        if (progress_) {
                          char line[128];
                          std::snprintf(line, sizeof line,
                                        "retrain %zu/%zu val=%.4e\n", e + 1,
                                        epochs, v);
                          *progress_ << line << std::flush;
                        }
                      });
  out.final_val_mse = best_val;
  retrained_ = std::move(best_state);
  retrain_ = out;
  return out;
}

void ActiveLearner::run() {
  if (!initialized_) initialize();
  while (t_ < config_.epochs) run_epoch();
  final_retrain(config_.final_retrain_epochs);
}

const nn::ModelState& ActiveLearner::reported_model() const {
  if (retrained_) return *retrained_;
  if (epochs_.empty()) throw ConfigError("no epochs completed");
  return best_states_[best_.model];
}

double ActiveLearner::reported_test_mse() const {
  return evaluate(*net_, reported_model(), test_);
}

double ActiveLearner::reported_val_mse() const {
  return evaluate(*net_, reported_model(), validation_);
}

// ---- baselines ----------------------------------------------------------------

std::string to_string(BaselineStrategy s) {
  return s == BaselineStrategy::uniform ? "uniform" : "lhs";
}

BaselineStrategy baseline_strategy_from_string(const std::string& s) {
  if (s == "uniform") return BaselineStrategy::uniform;
  if (s == "lhs") return BaselineStrategy::lhs;
  throw ConfigError("baseline strategy '" + s + "' (expected uniform or lhs)");
}

BaselineResult run_baseline(const RunConfig& config, oracle::Oracle& oracle,
                            std::size_t budget, BaselineStrategy strategy,
                            std::size_t steps, std::ostream* progress) {
  config.validate();
  if (budget < 1) throw ConfigError("baseline budget must be >= 1");
  const nn::Network net(nn::preset_by_name(config.preset, config.dimension()));
  check_oracle(config, oracle, net);
  const std::size_t n = config.dimension();
  const auto space = config.resolved_space();

  Rng point_rng(derive_seed(config.seed, kBaselinePoints));
  const auto xs = strategy == BaselineStrategy::uniform
                      ? uniform_points(budget, n, point_rng)
                      : space::lhs_sample(budget, n, point_rng);
  const auto ys = label_points(oracle, xs);
  const LabeledSet val = labeled(oracle, validation_points(config));
  const LabeledSet test = labeled(oracle, test_points(config));

  BaselineResult out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Instance in;
    in.id = i;
    in.x = xs[i];
    in.x_physical = space.scale(xs[i]);
    in.y = ys[i];
    in.block = space::block_linear(space::block_index(xs[i], config.partitions),
                                   config.partitions);
    out.dataset.push_back(std::move(in));
  }
  const LabeledSet data = make_labeled_set(xs, ys);

  Member m;
  m.state = net.initialize(derive_seed(config.seed, kBaselineInit));
  m.rng = Rng(derive_seed(config.seed, kBaselineTrain));
  out.best_val_mse = std::numeric_limits<double>::infinity();
  std::size_t done = 0;
  while (done < steps) {
    const std::size_t chunk =
        std::min(kBaselineValidationInterval, steps - done);
    train_member(net, m, data, chunk, config.batch_size, config.optimizer);
    done += chunk;
    const double v = evaluate(net, m.state, val);
    out.checked_steps.push_back(done);
    out.val_mse.push_back(v);
    if (v < out.best_val_mse) {
      out.best_val_mse = v;
      out.model = m.state;
    }
    if (progress && (out.checked_steps.size() % 20 == 0 || done == steps)) {
      char line[128];
      std::snprintf(line, sizeof line, "baseline step %zu/%zu val=%.4e\n",
                    done, steps, v);
      *progress << line << std::flush;
    }
  }
  if (steps == 0) {
    out.model = m.state;
    out.best_val_mse = evaluate(net, m.state, val);
  }
  out.steps = done;
  out.test_mse = evaluate(net, out.model, test);
  return out;
}

}  // namespace qbc::orchestrator
