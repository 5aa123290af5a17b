#pragma once

// Training loop, learning-curve recording, K-fold orchestration and test
// evaluation.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "socdfn/dataset.hpp"
#include "socdfn/network.hpp"
#include "socdfn/optimize.hpp"

namespace socdfn {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  OptimizerConfig optimizer;
  RegConfig reg;
  LossKind loss = LossKind::mse;
  std::uint64_t shuffle_seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_mae = 0.0;
  double val_loss = 0.0;
  double val_mae = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct RunHistory {
  std::vector<EpochRecord> epochs;

  friend bool operator==(const RunHistory&, const RunHistory&) = default;
};

struct EpochMetrics {
  double loss = 0.0;  // mean per-row data loss
  double mae = 0.0;   // on train-mode (dropout active) predictions
};

/// Mean absolute error in the units of the targets (SOC percent).
double mae(const Vector& pred, const Vector& target);

/// Matched features and targets.
struct Samples {
  Matrix x;
  Vector y;
};

Samples make_samples(const Normalizer& norm, const Dataset& d);

/// Optional observers; `on_batch` sees the local row indices of each batch.
struct FitHooks {
  std::function<void(std::size_t epoch, std::span<const std::size_t> rows)> on_batch;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// One pass over every batch: forward (train mode), backward with the
/// penalty, optimizer step. `epoch` (0-based) seeds the shuffle and dropout
/// streams. Throws NumericError on a non-finite loss.
EpochMetrics train_epoch(Network& net, OptimizerState& state, const Samples& train, const TrainConfig& cfg,
                         std::size_t epoch, const FitHooks& hooks = {});

/// Inference-mode MSE and MAE; never touches the parameters.
EpochMetrics evaluate_samples(const Network& net, const Samples& data);

/// Runs cfg.epochs epochs, validating after each one.
RunHistory fit(Network& net, const Samples& train, const Samples& val, const TrainConfig& cfg,
               const FitHooks& hooks = {});

struct CVReport {
  std::size_t k = 0;
  std::vector<RunHistory> histories;
  std::vector<double> final_val_mae;
  std::vector<double> best_val_mae;
  double mean_val_mae = 0.0;
  double std_val_mae = 0.0;  // population
  double mean_best_val_mae = 0.0;
  double std_best_val_mae = 0.0;
};

struct CVOptions {
  std::size_t jobs = 1;
  /// Receives the original (pre-split) row index of every training row the
  /// fold consumes. Called from worker threads when jobs > 1.
  std::function<void(std::size_t fold, std::span<const std::size_t> rows)> on_train_rows;
  /// Receives each fold's validation row indices before training starts.
  std::function<void(std::size_t fold, std::span<const std::size_t> rows)> on_val_rows;
};

/// K-fold cross-validation over `train`. Each fold fits its own normalizer on
/// its training part, initializes a fresh network from (seed, fold) and is
/// scored by its final-epoch validation MAE.
CVReport cross_validate(const Dataset& train, const std::vector<LayerSpec>& specs, std::size_t k,
                        const TrainConfig& cfg, std::uint64_t seed, const CVOptions& options = {});

/// Unclamped inference MAE on a held-out set. Throws ConfigError when empty.
double evaluate(const Network& net, const Normalizer& norm, const Dataset& test);

}  // namespace socdfn
