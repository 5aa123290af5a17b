#include "socdfn/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "socdfn/rng.hpp"

namespace socdfn {

namespace {

constexpr const char* kFeatureHeader = "t_s,voltage_v,current_a,temp_c";

void say(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

Network build_network(const ModelRecipe& r, std::uint64_t init_seed) { return init_network(r.specs(), init_seed); }

}  // namespace

RunSeeds RunSeeds::from(std::uint64_t seed) {
  return {derive_seed(seed, 0x5e11), derive_seed(seed, 0x1a17), derive_seed(seed, 0x5f1e)};
}

ModelRecipe preset_recipe(const std::string& name) {
  ModelRecipe r;
  r.preset = name;
  r.units = 256;
  r.train.batch_size = 128;
  r.train.epochs = 50;
  if (name == "paper-2h") {
    r.hidden = 2;
    r.dropout = 0.0;
  } else if (name == "paper-4h-dropout") {
    r.hidden = 2;
    r.dropout = 0.5;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected paper-2h or paper-4h-dropout)");
  }
  return r;
}

std::vector<std::string> preset_names() { return {"paper-2h", "paper-4h-dropout"}; }

SimulationResult run_gen_data(const GenDataOptions& o) {
  CycleConfig cycle = o.cycle;
  cycle.seed = o.seed;
  const auto profile = generate_drive_cycle(cycle);
  MeasurementNoise noise{o.voltage_noise, o.current_noise, o.temperature_noise, derive_seed(o.seed, 1)};
  auto sim = simulate_cell(profile, o.cell, o.soc0, cycle.dt, noise);
  sim.dataset.name = "battsim-" + std::to_string(o.seed);
  write_csv(sim.dataset, o.out);
  return sim;
}

TrainOutcome run_train(const TrainOptions& o) {
  const auto seeds = RunSeeds::from(o.seed);
  const Dataset data = load_csv(o.data);

  Dataset train_set;
  Dataset val_set;
  Dataset test_set;
  if (o.test) {
    // External test file: the data file only feeds train/validation.
    test_set = load_csv(*o.test);
    const double val_share = o.val_frac / (o.train_frac + o.val_frac);
    auto split = split_train_val(data, val_share, seeds.split, o.shuffle_rows);
    train_set = std::move(split.train);
    val_set = std::move(split.val);
  } else {
    auto split = split_holdout(data, o.train_frac, o.val_frac, seeds.split, o.shuffle_rows);
    train_set = std::move(split.train);
    val_set = std::move(split.val);
    // File order keeps t_s non-decreasing so the split loads back as a dataset.
    auto rows = split.test_idx;
    std::sort(rows.begin(), rows.end());
    test_set = data.subset(rows, data.name + "-test");
    if (o.test_out) write_csv(test_set, *o.test_out);
  }

  TrainOutcome out;
  out.train_rows = train_set.size();
  out.val_rows = val_set.size();
  out.test_rows = test_set.size();
  out.norm = fit_normalizer(train_set);

  TrainConfig cfg = o.recipe.train;
  cfg.shuffle_seed = seeds.shuffle;
  Network net = build_network(o.recipe, seeds.init);
  FitHooks hooks;
  if (o.progress) {
    hooks.on_epoch = [&](const EpochRecord& e) {
      say(o.progress, "epoch " + std::to_string(e.epoch) + "/" + std::to_string(cfg.epochs) +
                          "  train_mae " + format_double(e.train_mae) + "  val_mae " + format_double(e.val_mae));
    };
  }
  out.history = fit(net, make_samples(out.norm, train_set), make_samples(out.norm, val_set), cfg, hooks);
  out.test_mae = evaluate(net, out.norm, test_set);

  save_model(net, out.norm, o.model_out, {o.recipe.preset, cfg, seeds.init, seeds.split});
  if (o.history_out) {
    write_history_csv(out.history, *o.history_out);
    if (o.gnuplot_out) write_gnuplot_script(*o.history_out, *o.gnuplot_out);
  }
  return out;
}

CVReport run_crossval(const CrossvalOptions& o) {
  const auto seeds = RunSeeds::from(o.seed);
  const Dataset data = load_csv(o.data);
  auto split = split_holdout(data, o.train_frac, o.val_frac, seeds.split, o.shuffle_rows);
  Dataset pool{data.name + "-cv", std::move(split.train.records)};
  pool.records.insert(pool.records.end(), split.val.records.begin(), split.val.records.end());

  TrainConfig cfg = o.recipe.train;
  cfg.shuffle_seed = seeds.shuffle;
  CVOptions options;
  options.jobs = o.jobs;
  auto report = cross_validate(pool, o.recipe.specs(), o.k, cfg, seeds.init, options);
  write_cv_report_csv(report, o.report_out);
  if (o.history_prefix) {
    for (std::size_t f = 0; f < report.k; ++f)
      write_history_csv(report.histories[f], o.history_prefix->string() + "fold" + std::to_string(f) + ".csv");
  }
  return report;
}

double run_evaluate(const std::filesystem::path& model, const std::filesystem::path& data) {
  const auto loaded = load_model(model);
  return evaluate(loaded.net, loaded.norm, load_csv(data));
}

std::vector<SampleRecord> load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == kCsvHeader) return load_csv(path).records;
  if (line != kFeatureHeader)
    throw ParseError(path.string() + ":1: header must be '" + std::string(kCsvHeader) + "' or '" + kFeatureHeader + "'");

  std::vector<SampleRecord> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 4> v{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t f = 0; f < v.size(); ++f) {
      auto [next, ec] = std::from_chars(p, end, v[f]);
      const bool last = f + 1 == v.size();
      if (ec != std::errc() || !std::isfinite(v[f]) || (last ? next != end : (next == end || *next != ',')))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed feature row");
      p = next + 1;
    }
    rows.push_back({v[0], v[1], v[2], v[3], 0.0});
  }
  if (rows.empty()) throw ValidationError(path.string() + ": empty dataset");
  return rows;
}

std::size_t run_predict(const std::filesystem::path& model, const std::filesystem::path& input,
                        const std::filesystem::path& out) {
  const auto loaded = load_model(model);
  const auto rows = load_feature_csv(input);
  const Vector soc = predict_soc(loaded.net, loaded.norm, rows);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + out.string());
  os << "t_s,soc_pct\n";
  for (std::size_t i = 0; i < rows.size(); ++i) os << format_double(rows[i].t) << ',' << format_double(soc[i]) << '\n';
  if (!os) throw IoError("write failure on " + out.string());
  return rows.size();
}

}  // namespace socdfn
