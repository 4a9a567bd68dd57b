#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkgmlp/adam.h"
#include "tkgmlp/matrix.h"
#include "tkgmlp/model.h"

namespace tkgmlp {

struct TrainConfig {
  std::size_t batch_size = 4096;
  double lr0 = 1e-3;
  double lr_decay_factor = 0.9;
  std::size_t lr_decay_every = 20;
  std::size_t max_epochs = 100;
  std::size_t patience = 20;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Whether epoch log lines carry wall-clock seconds. Off gives logs that are
  // byte-identical across reruns.
  bool log_elapsed = true;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// lr0 * decay^floor(epoch / every), rounded to 15 significant digits.
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

struct EarlyStopDecision {
  bool stop = false;
  std::size_t best_epoch = 0;  // earliest epoch holding the maximum
};

// `history` holds validation KS for epochs 0..current. Stops once
// current - best_epoch >= patience.
EarlyStopDecision early_stop_check(std::span<const double> history,
                                   std::size_t patience);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double valid_ks = 0.0;
  double valid_auc = 0.0;
  double elapsed_seconds = 0.0;
};

// Tab-separated: epoch, lr, train_loss, valid_ks_pct, valid_auc_pct,
// elapsed_s (the last column only when include_elapsed).
std::string epoch_log_header(bool include_elapsed);
std::string epoch_log_line(const EpochRecord& r, bool include_elapsed);

struct LabelledMatrix {
  Matrix x;
  std::vector<double> y;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_ks = 0.0;
  double best_auc = 0.0;
  bool stopped_early = false;
  bool diverged = false;
  std::string message;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam on mean BCE with a seeded per-epoch shuffle, validation KS
// and AUC after every epoch, KS-based early stopping. On return `model`
// holds the snapshot from the best validation-KS epoch. A non-finite loss
// or gradient stops training, restores that snapshot and sets `diverged`.
TrainResult train(TkgmlpModel& model, const LabelledMatrix& train_data,
                  const LabelledMatrix& valid_data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Row ranges of one epoch's minibatches. A trailing batch of one row is
// merged into its predecessor.
std::vector<std::pair<std::size_t, std::size_t>> minibatch_ranges(std::size_t rows,
                                                                  std::size_t batch_size);

}  // namespace tkgmlp
