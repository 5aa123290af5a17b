#pragma once

// On-disk formats.
//
// Model file: a versioned JSON document. Weights, biases and normalizer
// statistics are base64 strings of little-endian IEEE-754 doubles, so a
// save/load round trip is bit-exact.
//
// History CSV:  epoch,train_loss,train_mae,val_loss,val_mae
// CV report CSV: fold,final_val_mae,best_val_mae then `mean,...` and `std,...`

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "socdfn/network.hpp"
#include "socdfn/train.hpp"

namespace socdfn {

inline constexpr int kModelFormatVersion = 1;

/// Provenance echoed into the model file.
struct ModelMetadata {
  std::string preset;
  std::optional<TrainConfig> train;
  std::uint64_t init_seed = 0;
  std::uint64_t data_seed = 0;
};

struct LoadedModel {
  Network net;
  Normalizer norm;
  ModelMetadata meta;
};

std::string serialize_model(const Network& net, const Normalizer& norm, const ModelMetadata& meta = {});

/// Throws ParseError (with byte offset where available) on malformed input
/// and VersionError when format_version differs from kModelFormatVersion.
LoadedModel parse_model(const std::string& text);

void save_model(const Network& net, const Normalizer& norm, const std::filesystem::path& path,
                const ModelMetadata& meta = {});
LoadedModel load_model(const std::filesystem::path& path);

void write_history_csv(const RunHistory& history, const std::filesystem::path& path);
void write_cv_report_csv(const CVReport& report, const std::filesystem::path& path);

/// Writes a gnuplot script plotting train/val MAE from a history CSV.
void write_gnuplot_script(const std::filesystem::path& history_csv, const std::filesystem::path& script_path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace socdfn
