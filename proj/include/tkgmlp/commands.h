#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tkgmlp/checkpoint.h"
#include "tkgmlp/dataset.h"
#include "tkgmlp/grid_search.h"
#include "tkgmlp/metrics.h"
#include "tkgmlp/run_config.h"
#include "tkgmlp/trainer.h"

namespace tkgmlp {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Level from TKGMLP_LOG (quiet | info | debug, or 0/1/2); info by default.
LogLevel log_level_from_env();

struct Logger {
  std::ostream* sink = nullptr;
  LogLevel level = LogLevel::kInfo;

  void info(std::string_view msg) const;
  void debug(std::string_view msg) const;
};

// Train/valid/test tables for a run. For synthetic sources the true
// probabilities ride along (empty vectors for CSV sources).
struct PreparedData {
  Split split;
  bool has_test = false;
  CsvSchema schema;
  std::vector<double> oracle_train;
  std::vector<double> oracle_valid;
  std::vector<double> oracle_test;
};

PreparedData prepare_data(const RunConfig& cfg);

// Encodes a dataset with a fitted encoder and pairs it with its labels.
LabelledMatrix encode_labelled(const EncoderSpec& enc, const Dataset& ds);

struct FitOutcome {
  Checkpoint checkpoint;
  TrainResult result;
  MetricReport valid;
  std::optional<MetricReport> test;
  std::optional<MetricReport> bayes_valid;
};

// Fits the encoder on train only, trains one model, scores valid (and test).
// `log_file`, when open, receives the tab-separated epoch log.
FitOutcome fit_run(const RunConfig& cfg, const PreparedData& data, const Logger& log,
                   std::ostream* log_file = nullptr);

MetricReport evaluate_checkpoint(Checkpoint& ck, const Dataset& ds);

// Subcommands. Files land in cfg.output_dir; key=value summaries go to `out`.
void cmd_synth(const RunConfig& cfg, std::ostream& out, const Logger& log);
FitOutcome cmd_fit(const RunConfig& cfg, std::ostream& out, const Logger& log);
// Scores `data_csv` (read with the checkpoint's schema), or when that is
// empty the `split` ("train", "valid" or "test") of `cfg`'s data.
MetricReport cmd_evaluate(const std::filesystem::path& checkpoint,
                          const std::filesystem::path& data_csv, const RunConfig* cfg,
                          std::string_view split, std::ostream& out, const Logger& log);
std::vector<GridResult> cmd_grid(const RunConfig& cfg, std::ostream& out, const Logger& log);
// Encodes with the checkpoint's encoder when given, else one fitted on the
// config's train split. With `data_csv` writes encoded.csv, else one
// encoded_<split>.csv per split.
void cmd_encode(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                const std::filesystem::path& data_csv, std::ostream& out, const Logger& log);

// Rendering helpers.
std::string format_percent(double fraction);  // 2 decimals, e.g. "76.08"
std::string grid_results_tsv(const std::vector<GridResult>& ranked);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& x,
                      const std::vector<std::string>& names,
                      const std::vector<double>& labels);

}  // namespace tkgmlp
