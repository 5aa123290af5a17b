#include "socdfn/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "socdfn/rng.hpp"

namespace socdfn {

namespace {

// Streams derived from shuffle_seed: (epoch, 0) orders the batches,
// (epoch, b + 1) draws the dropout masks of batch b.
std::uint64_t order_seed(const TrainConfig& cfg, std::size_t epoch) { return derive_seed(cfg.shuffle_seed, epoch, 0); }

std::uint64_t dropout_seed(const TrainConfig& cfg, std::size_t epoch, std::size_t batch) {
  return derive_seed(cfg.shuffle_seed, epoch, batch + 1);
}

constexpr std::size_t kEvalChunk = 4096;

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  optimizer.validate();
  reg.validate();
}

double mae(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size() || pred.size() == 0)
    throw ShapeError("mae: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(target.size()) +
                     " targets");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(target[i] - pred[i]);
  return s / static_cast<double>(pred.size());
}

Samples make_samples(const Normalizer& norm, const Dataset& d) { return {apply_normalizer(norm, d), targets(d)}; }

EpochMetrics train_epoch(Network& net, OptimizerState& state, const Samples& train, const TrainConfig& cfg,
                         std::size_t epoch, const FitHooks& hooks) {
  const auto batches = batch_iter(train.x, train.y, cfg.batch_size,
                                  cfg.shuffle ? std::optional(order_seed(cfg, epoch)) : std::nullopt);
  // Per-row errors are reduced in row order so the epoch metrics do not
  // depend on the batch order.
  std::vector<double> row_loss(train.y.size());
  std::vector<double> row_abs(train.y.size());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto& batch = batches[b];
    if (hooks.on_batch) hooks.on_batch(epoch, batch.rows);
    auto fwd = forward(net, batch.x, Mode::train, dropout_seed(cfg, epoch, b));
    auto bwd = backward(net, fwd.cache, batch.y, cfg.reg, cfg.loss);
    if (!std::isfinite(bwd.loss))
      throw NumericError("non-finite loss in epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(b));
    for (std::size_t r = 0; r < batch.rows.size(); ++r) {
      const double e = batch.y[r] - fwd.prediction[r];
      row_loss[batch.rows[r]] = cfg.loss == LossKind::mse ? e * e : std::abs(e);
      row_abs[batch.rows[r]] = std::abs(e);
    }
    optimizer_step(state, net, bwd.grads, cfg.optimizer);
  }
  double loss_sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < row_loss.size(); ++i) {
    loss_sum += row_loss[i];
    abs_sum += row_abs[i];
  }
  const double n = static_cast<double>(train.y.size());
  return {loss_sum / n, abs_sum / n};
}

EpochMetrics evaluate_samples(const Network& net, const Samples& data) {
  const std::size_t n = data.y.size();
  if (n == 0 || data.x.rows() != n) throw ShapeError("evaluate_samples: features and targets disagree");
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, n - start);
    Matrix chunk(len, data.x.cols(),
                 std::vector<double>(data.x.row(start).begin(), data.x.row(start).begin() + len * data.x.cols()));
    const Vector pred = predict(net, chunk);
    for (std::size_t i = 0; i < len; ++i) {
      const double e = data.y[start + i] - pred[i];
      sq += e * e;
      abs += std::abs(e);
    }
  }
  return {sq / static_cast<double>(n), abs / static_cast<double>(n)};
}

RunHistory fit(Network& net, const Samples& train, const Samples& val, const TrainConfig& cfg,
               const FitHooks& hooks) {
  cfg.validate();
  if (val.y.size() == 0) throw ConfigError("validation set is empty");
  OptimizerState state = init_optimizer_state(net);
  RunHistory history;
  history.epochs.reserve(cfg.epochs);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto tr = train_epoch(net, state, train, cfg, e, hooks);
    const auto va = evaluate_samples(net, val);
    if (!std::isfinite(va.loss)) throw NumericError("non-finite validation loss in epoch " + std::to_string(e + 1));
    history.epochs.push_back({e + 1, tr.loss, tr.mae, va.loss, va.mae});
    if (hooks.on_epoch) hooks.on_epoch(history.epochs.back());
  }
  return history;
}

CVReport cross_validate(const Dataset& train, const std::vector<LayerSpec>& specs, std::size_t k,
                        const TrainConfig& cfg, std::uint64_t seed, const CVOptions& options) {
  cfg.validate();
  validate_specs(specs);
  const FoldAssignment folds = kfold_split(train.size(), k, seed);

  CVReport report;
  report.k = k;
  report.histories.resize(k);
  report.final_val_mae.resize(k);
  report.best_val_mae.resize(k);
  std::vector<std::exception_ptr> errors(k);

  auto run_fold = [&](std::size_t fold) {
    try {
      const auto train_idx = folds.training_indices(fold);
      const auto val_idx = folds.validation_indices(fold);
      if (options.on_val_rows) options.on_val_rows(fold, val_idx);
      const Dataset fold_train = train.subset(train_idx, train.name + "-fold" + std::to_string(fold) + "-train");
      const Dataset fold_val = train.subset(val_idx, train.name + "-fold" + std::to_string(fold) + "-val");
      const Normalizer norm = fit_normalizer(fold_train);

      TrainConfig fold_cfg = cfg;
      fold_cfg.shuffle_seed = derive_seed(cfg.shuffle_seed, fold);
      Network net = init_network(specs, derive_seed(seed, fold, 1));
      FitHooks hooks;
      if (options.on_train_rows) {
        hooks.on_batch = [&](std::size_t, std::span<const std::size_t> rows) {
          std::vector<std::size_t> original(rows.size());
          for (std::size_t i = 0; i < rows.size(); ++i) original[i] = train_idx[rows[i]];
          options.on_train_rows(fold, original);
        };
      }
      auto history = fit(net, make_samples(norm, fold_train), make_samples(norm, fold_val), fold_cfg, hooks);
      double best = history.epochs.front().val_mae;
      for (const auto& e : history.epochs) best = std::min(best, e.val_mae);
      report.final_val_mae[fold] = history.epochs.back().val_mae;
      report.best_val_mae[fold] = best;
      report.histories[fold] = std::move(history);
    } catch (...) {
      errors[fold] = std::current_exception();
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, k);
  if (jobs == 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t f = next++; f < k; f = next++) run_fold(f);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size()));
  };
  mean_std(report.final_val_mae, report.mean_val_mae, report.std_val_mae);
  mean_std(report.best_val_mae, report.mean_best_val_mae, report.std_best_val_mae);
  return report;
}

double evaluate(const Network& net, const Normalizer& norm, const Dataset& test) {
  if (test.empty()) throw ConfigError("test set is empty");
  return evaluate_samples(net, make_samples(norm, test)).mae;
}

}  // namespace socdfn
