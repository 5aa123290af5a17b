#pragma once

// End-to-end workflow behind the `socdfn` subcommands: generate data, fit on
// a holdout split, cross-validate, evaluate and predict.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "socdfn/battsim.hpp"
#include "socdfn/model_io.hpp"
#include "socdfn/train.hpp"

namespace socdfn {

/// Architecture and training recipe. Presets fill in every field; explicit
/// flags override them afterwards.
struct ModelRecipe {
  std::string preset = "custom";
  std::size_t hidden = 2;
  std::size_t units = 256;
  double dropout = 0.0;
  TrainConfig train;

  std::vector<LayerSpec> specs() const { return dense_stack(kFeatureCount, hidden, units, dropout); }
};

/// "paper-2h": two ReLU layers of 256, no regularization, batch 128.
/// "paper-4h-dropout": two ReLU layers of 256, each followed by dropout 0.5
/// (dense, dropout, dense, dropout), batch 128.
ModelRecipe preset_recipe(const std::string& name);
std::vector<std::string> preset_names();

/// Seeds derived from the single --seed of a run.
struct RunSeeds {
  std::uint64_t split;
  std::uint64_t init;
  std::uint64_t shuffle;

  static RunSeeds from(std::uint64_t seed);
};

struct GenDataOptions {
  std::filesystem::path out;
  std::uint64_t seed = 0;
  CycleConfig cycle;
  CellParams cell;
  double soc0 = 100.0;
  double voltage_noise = 0.012;
  double current_noise = 0.02;
  double temperature_noise = 0.3;
};

SimulationResult run_gen_data(const GenDataOptions& o);

using ProgressFn = std::function<void(const std::string&)>;

struct TrainOptions {
  std::filesystem::path data;
  std::optional<std::filesystem::path> test;      // held-out file; never trained on
  std::filesystem::path model_out;
  std::optional<std::filesystem::path> history_out;
  std::optional<std::filesystem::path> test_out;  // writes the internal test split
  std::optional<std::filesystem::path> gnuplot_out;
  ModelRecipe recipe;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  double val_frac = 0.1;
  bool shuffle_rows = true;
  ProgressFn progress;
};

struct TrainOutcome {
  RunHistory history;
  Normalizer norm;
  double test_mae = 0.0;
  std::size_t train_rows = 0;
  std::size_t val_rows = 0;
  std::size_t test_rows = 0;
};

TrainOutcome run_train(const TrainOptions& o);

struct CrossvalOptions {
  std::filesystem::path data;
  std::filesystem::path report_out;
  std::optional<std::filesystem::path> history_prefix;  // writes <prefix>fold<j>.csv
  ModelRecipe recipe;
  std::size_t k = 4;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  double val_frac = 0.1;
  bool shuffle_rows = true;
};

/// Cross-validates on the train+validation part of the holdout split; the
/// test part is set aside exactly as `train` would.
CVReport run_crossval(const CrossvalOptions& o);

/// MAE of a saved model on a labelled CSV.
double run_evaluate(const std::filesystem::path& model, const std::filesystem::path& data);

/// Writes `t_s,soc_pct` predictions for a CSV that carries either the full
/// schema or only `t_s,voltage_v,current_a,temp_c`.
std::size_t run_predict(const std::filesystem::path& model, const std::filesystem::path& input,
                        const std::filesystem::path& out);

/// Reads the full schema or the feature-only header (soc left at 0).
std::vector<SampleRecord> load_feature_csv(const std::filesystem::path& path);

}  // namespace socdfn
