#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tkgmlp/csv.h"
#include "tkgmlp/encoders.h"
#include "tkgmlp/grid_search.h"
#include "tkgmlp/model.h"
#include "tkgmlp/synthetic.h"
#include "tkgmlp/trainer.h"

namespace tkgmlp {

// Where the rows come from. With source "synth" a preset (or an explicit
// spec) is generated in memory and cut into train/valid/test by row counts.
// With source "csv" either three files are given, or one file plus split
// fractions for a chronological split.
struct DataConfig {
  std::string source = "synth";
  std::string preset = "desk_tiny";
  std::optional<SyntheticTaskSpec> synth_spec;
  std::size_t train_rows = 200000;
  std::size_t valid_rows = 50000;
  std::size_t test_rows = 50000;
  std::string csv;
  std::array<double, 3> split = {0.7, 0.15, 0.15};
  std::string train_csv;
  std::string valid_csv;
  std::string test_csv;
  CsvSchema schema;
};

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kQle;
  std::size_t n_bins = 64;
};

// One run, one document. input_dim of the model is filled in from the
// fitted encoder; the training seed is the run seed.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string output_dir = "tkgmlp_out";
  DataConfig data;
  EncoderConfig encoder;
  ModelConfig model;
  std::optional<GridSpace> grid;
  TrainConfig train;

  // The full document with every key at its default value.
  static nlohmann::json defaults_json();
  // Overlays `j` on the defaults. Any key absent from the defaults is
  // rejected with ConfigError naming its path.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  // Synthetic task for this run (preset or explicit spec), seeded with the
  // run seed.
  SyntheticTaskSpec synth_task() const;
};

// Sets `path=value` (dotted path, e.g. "train.max_epochs=5") in `doc`. The
// value is parsed as JSON and falls back to a plain string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

// Reads a config file (empty path: defaults only), applies overrides in
// order, then the seed override.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed);

}  // namespace tkgmlp
