#pragma once

// Drive-cycle records, feature scaling, holdout/K-fold partitioning and
// mini-batching.
//
// CSV interchange schema (header is matched byte for byte):
//   t_s,voltage_v,current_a,temp_c,soc_pct
// Current is positive while charging and negative while discharging.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socdfn/tensor.hpp"

namespace socdfn {

inline constexpr std::size_t kFeatureCount = 3;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {"voltage", "current", "temperature"};
inline constexpr const char* kCsvHeader = "t_s,voltage_v,current_a,temp_c,soc_pct";

struct SampleRecord {
  double t = 0.0;            // s
  double voltage = 0.0;      // V
  double current = 0.0;      // A, charging positive
  double temperature = 0.0;  // degC
  double soc = 0.0;          // percent, [0, 100]

  std::array<double, kFeatureCount> features() const { return {voltage, current, temperature}; }

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Dataset {
  std::string name;
  std::vector<SampleRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  /// Rows at the given indices, in index order.
  Dataset subset(std::span<const std::size_t> indices, std::string subset_name) const;
};

/// Reads a schema-conformant CSV. Throws IoError, ParseError (with line
/// number) or ValidationError (empty file, soc outside [0,100], voltage <= 0,
/// decreasing timestamps).
Dataset load_csv(const std::filesystem::path& path);

void write_csv(const Dataset& d, const std::filesystem::path& path);

/// Per-feature z-score parameters. A default-constructed normalizer is
/// unfitted and rejected by apply().
struct Normalizer {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> std{};
  bool fitted = false;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

/// Sample mean and population (divide-by-N) standard deviation per feature.
/// Throws ValidationError naming the feature when it is constant.
Normalizer fit_normalizer(const Dataset& train);

/// (N x 3) matrix of (raw - mean) / std.
Matrix apply_normalizer(const Normalizer& n, const Dataset& d);
Matrix apply_normalizer(const Normalizer& n, std::span<const SampleRecord> records);

/// SOC column in percent, unscaled.
Vector targets(const Dataset& d);

struct HoldoutSplit {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  std::vector<std::size_t> test_idx;
};

/// Shuffles row indices (unless shuffle is false), then takes
/// round(N*train_frac) rows for train, round(N*val_frac) for validation and
/// the remainder for test. Every split must be non-empty.
HoldoutSplit split_holdout(const Dataset& d, double train_frac, double val_frac, std::uint64_t seed,
                           bool shuffle = true);

/// Two-way variant for runs with an external test file: round(N*val_frac)
/// rows go to validation, the rest to train; `test` stays empty.
HoldoutSplit split_train_val(const Dataset& d, double val_frac, std::uint64_t seed, bool shuffle = true);

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> validation_indices(std::size_t fold) const;
  std::vector<std::size_t> training_indices(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seed-shuffled indices dealt round-robin into k folds; requires 2 <= k <= n.
FoldAssignment kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct Batch {
  Matrix x;
  Vector y;
  std::vector<std::size_t> rows;  // source row of each batch row
};

/// Splits the rows into consecutive batches of batch_size (the last may be
/// short). With a seed the row order is a seed-deterministic permutation,
/// otherwise input order is kept.
std::vector<Batch> batch_iter(const Matrix& x, const Vector& y, std::size_t batch_size,
                              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace socdfn
