#pragma once

#include <cstddef>
#include <filesystem>

#include "json.hpp"
#include "tkgmlp/csv.h"
#include "tkgmlp/encoders.h"
#include "tkgmlp/model.h"

namespace tkgmlp {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  std::size_t best_epoch = 0;
  double best_valid_ks = 0.0;
  double best_valid_auc = 0.0;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
};

// Everything needed to score raw rows: the fitted encoder, the CSV schema it
// was fitted under, and the model.
struct Checkpoint {
  nlohmann::json run_config;
  CsvSchema schema;
  EncoderSpec encoder;
  TkgmlpModel model;
  CheckpointMeta meta;
};

nlohmann::json checkpoint_to_json(Checkpoint& ck);
// Throws IoError on a format-version mismatch, a missing or misshapen
// tensor, or any malformed field.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tkgmlp
