// socdfn: train and evaluate feedforward SOC estimators on drive-cycle data.

#include <algorithm>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "socdfn/pipeline.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kSchema = 4, kNumeric = 5 };

constexpr const char* kExitCodes =
    "Exit codes: 0 success, 2 usage/configuration, 3 I/O, 4 schema/validation, 5 numeric failure (NaN loss)";

struct RecipeFlags {
  std::string preset;
  std::optional<std::size_t> hidden;
  std::optional<std::size_t> units;
  std::optional<double> dropout;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<std::string> optimizer;
  std::optional<double> lr;
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<double> rho;
  std::optional<double> epsilon;
  std::optional<double> l1;
  std::optional<double> l2;
  std::optional<std::string> loss;
  std::uint64_t seed = 0;
  double train_frac = 0.8;
  double val_frac = 0.1;
  bool no_shuffle = false;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "Architecture preset: paper-2h or paper-4h-dropout");
    app->add_option("--hidden", hidden, "Number of hidden ReLU layers");
    app->add_option("--units", units, "Units per hidden layer");
    app->add_option("--dropout", dropout, "Dropout rate after each hidden layer");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--batch", batch, "Mini-batch size");
    app->add_option("--optimizer", optimizer, "sgd, rmsprop or adam")->check(CLI::IsMember({"sgd", "rmsprop", "adam"}));
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--beta1", beta1, "Adam first-moment decay");
    app->add_option("--beta2", beta2, "Adam second-moment decay");
    app->add_option("--rho", rho, "RMSProp decay");
    app->add_option("--epsilon", epsilon, "Optimizer epsilon");
    app->add_option("--l1", l1, "L1 weight penalty coefficient");
    app->add_option("--l2", l2, "L2 weight penalty coefficient");
    app->add_option("--loss", loss, "Training loss: mse or mae")->check(CLI::IsMember({"mse", "mae"}));
    app->add_option("--seed", seed, "Seed for splits, init, shuffling and dropout");
    app->add_option("--train-frac", train_frac, "Training fraction of the holdout split");
    app->add_option("--val-frac", val_frac, "Validation fraction of the holdout split");
    app->add_flag("--no-shuffle", no_shuffle, "Split rows in file order instead of shuffling");
  }

  socdfn::ModelRecipe recipe() const {
    socdfn::ModelRecipe r = preset.empty() ? socdfn::ModelRecipe{} : socdfn::preset_recipe(preset);
    if (hidden) r.hidden = *hidden;
    if (units) r.units = *units;
    if (dropout) r.dropout = *dropout;
    if (epochs) r.train.epochs = *epochs;
    if (batch) r.train.batch_size = *batch;
    if (optimizer) r.train.optimizer.kind = socdfn::optimizer_from_string(*optimizer);
    if (lr) r.train.optimizer.learning_rate = *lr;
    if (beta1) r.train.optimizer.beta1 = *beta1;
    if (beta2) r.train.optimizer.beta2 = *beta2;
    if (rho) r.train.optimizer.rho = *rho;
    if (epsilon) r.train.optimizer.epsilon = *epsilon;
    if (l1) r.train.reg.l1 = *l1;
    if (l2) r.train.reg.l2 = *l2;
    if (loss) r.train.loss = *loss == "mae" ? socdfn::LossKind::mae : socdfn::LossKind::mse;
    if (r.units == 0) throw socdfn::ConfigError("--units must be at least 1");
    r.train.validate();
    return r;
  }
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const socdfn::IoError*>(&e)) return kIo;
  if (dynamic_cast<const socdfn::ParseError*>(&e) || dynamic_cast<const socdfn::ValidationError*>(&e) ||
      dynamic_cast<const socdfn::VersionError*>(&e) || dynamic_cast<const socdfn::ShapeError*>(&e) ||
      dynamic_cast<const socdfn::ContractError*>(&e))
    return kSchema;
  if (dynamic_cast<const socdfn::NumericError*>(&e)) return kNumeric;
  if (dynamic_cast<const socdfn::ConfigError*>(&e)) return kUsage;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep feedforward SOC estimation for Li-ion drive-cycle data"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  // gen-data
  socdfn::GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Simulate a drive cycle and write a schema CSV");
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();
  gen_cmd->add_option("--seed", gen.seed, "Drive-cycle and sensor-noise seed");
  gen_cmd->add_option("--duration", gen.cycle.duration, "Cycle length in seconds");
  gen_cmd->add_option("--dt", gen.cycle.dt, "Sample period in seconds");
  gen_cmd->add_option("--peak-discharge", gen.cycle.peak_discharge, "Peak discharge current (A)");
  gen_cmd->add_option("--regen-fraction", gen.cycle.regen_fraction, "Fraction of charging steps");
  gen_cmd->add_option("--capacity", gen.cell.capacity_ah, "Cell capacity (Ah)");
  gen_cmd->add_option("--soc0", gen.soc0, "Initial SOC (%)");
  gen_cmd->add_option("--voltage-noise", gen.voltage_noise, "Voltage sensor noise std (V)");
  gen_cmd->add_option("--current-noise", gen.current_noise, "Current sensor noise std (A)");
  gen_cmd->add_option("--temp-noise", gen.temperature_noise, "Temperature sensor noise std (degC)");

  // train
  socdfn::TrainOptions tr;
  RecipeFlags tr_flags;
  std::string tr_test;
  std::string tr_history;
  std::string tr_test_out;
  std::string tr_gnuplot;
  bool quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Fit on a holdout split, save model and learning curves");
  train_cmd->add_option("--data", tr.data, "Training CSV")->required();
  train_cmd->add_option("--model", tr.model_out, "Model output (JSON)")->required();
  train_cmd->add_option("--test", tr_test, "Held-out test CSV; never used for training");
  train_cmd->add_option("--history", tr_history, "Learning-curve CSV output");
  train_cmd->add_option("--test-out", tr_test_out, "Write the internal test split to this CSV");
  train_cmd->add_option("--emit-gnuplot", tr_gnuplot, "Write a gnuplot script for the history CSV");
  train_cmd->add_flag("--quiet", quiet, "No per-epoch progress");
  tr_flags.attach(train_cmd);

  // crossval
  socdfn::CrossvalOptions cv;
  RecipeFlags cv_flags;
  std::string cv_prefix;
  std::optional<std::size_t> cv_jobs;
  auto* cv_cmd = app.add_subcommand("crossval", "K-fold cross-validation; writes a CV report CSV");
  cv_cmd->add_option("--data", cv.data, "Training CSV")->required();
  cv_cmd->add_option("--report", cv.report_out, "CV report CSV output")->required();
  cv_cmd->add_option("--k", cv.k, "Number of folds")->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--jobs", cv_jobs, "Parallel fold workers (default: min(k, CPUs))");
  cv_cmd->add_option("--history-prefix", cv_prefix, "Write per-fold histories to <prefix>fold<j>.csv");
  cv_flags.attach(cv_cmd);

  // evaluate
  std::string ev_model;
  std::string ev_data;
  auto* ev_cmd = app.add_subcommand("evaluate", "Print the MAE of a saved model on a labelled CSV");
  ev_cmd->add_option("--model", ev_model, "Model JSON")->required();
  ev_cmd->add_option("--test", ev_data, "Labelled CSV")->required();

  // predict
  std::string pr_model;
  std::string pr_in;
  std::string pr_out;
  auto* pr_cmd = app.add_subcommand("predict", "Write SOC predictions for a feature CSV");
  pr_cmd->add_option("--model", pr_model, "Model JSON")->required();
  pr_cmd->add_option("--data", pr_in, "Feature CSV")->required();
  pr_cmd->add_option("--out", pr_out, "Output CSV (t_s,soc_pct)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) {
      const auto sim = socdfn::run_gen_data(gen);
      std::cerr << "wrote " << sim.dataset.size() << " rows to " << gen.out.string()
                << (sim.truncated ? " (truncated at SOC 0)" : "") << '\n';
    } else if (*train_cmd) {
      tr.recipe = tr_flags.recipe();
      tr.seed = tr_flags.seed;
      tr.train_frac = tr_flags.train_frac;
      tr.val_frac = tr_flags.val_frac;
      tr.shuffle_rows = !tr_flags.no_shuffle;
      if (!tr_test.empty()) tr.test = tr_test;
      if (!tr_history.empty()) tr.history_out = tr_history;
      if (!tr_test_out.empty()) tr.test_out = tr_test_out;
      if (!tr_gnuplot.empty()) {
        if (tr_history.empty()) throw socdfn::ConfigError("--emit-gnuplot needs --history");
        tr.gnuplot_out = tr_gnuplot;
      }
      if (!quiet) tr.progress = [](const std::string& m) { std::cerr << m << '\n'; };
      const auto outcome = socdfn::run_train(tr);
      std::cout << "train_rows " << outcome.train_rows << "\nval_rows " << outcome.val_rows << "\ntest_rows "
                << outcome.test_rows << "\nfinal_train_mae " << socdfn::format_double(outcome.history.epochs.back().train_mae)
                << "\nfinal_val_mae " << socdfn::format_double(outcome.history.epochs.back().val_mae) << "\ntest_mae "
                << socdfn::format_double(outcome.test_mae) << '\n';
    } else if (*cv_cmd) {
      cv.recipe = cv_flags.recipe();
      cv.seed = cv_flags.seed;
      cv.train_frac = cv_flags.train_frac;
      cv.val_frac = cv_flags.val_frac;
      cv.shuffle_rows = !cv_flags.no_shuffle;
      const std::size_t cpus = std::max(1u, std::thread::hardware_concurrency());
      cv.jobs = cv_jobs.value_or(std::min(cv.k, cpus));
      if (cv.jobs == 0) throw socdfn::ConfigError("--jobs must be at least 1");
      if (!cv_prefix.empty()) cv.history_prefix = cv_prefix;
      const auto report = socdfn::run_crossval(cv);
      for (std::size_t f = 0; f < report.k; ++f)
        std::cout << "fold " << f << " final_val_mae " << socdfn::format_double(report.final_val_mae[f]) << '\n';
      std::cout << "mean_val_mae " << socdfn::format_double(report.mean_val_mae) << "\nstd_val_mae "
                << socdfn::format_double(report.std_val_mae) << '\n';
    } else if (*ev_cmd) {
      std::cout << socdfn::format_double(socdfn::run_evaluate(ev_model, ev_data)) << '\n';
    } else if (*pr_cmd) {
      const auto n = socdfn::run_predict(pr_model, pr_in, pr_out);
      std::cerr << "wrote " << n << " predictions to " << pr_out << '\n';
    }
  } catch (const socdfn::Error& e) {
    std::cerr << "socdfn: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "socdfn: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
