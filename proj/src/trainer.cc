#include "tkgmlp/trainer.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tkgmlp/error.h"
#include "tkgmlp/loss.h"
#include "tkgmlp/metrics.h"
#include "tkgmlp/random.h"

namespace tkgmlp {

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (lr_decay_every < 1) throw ConfigError("train: lr_decay_every must be >= 1");
  if (!(lr0 > 0.0)) throw ConfigError("train: lr must be > 0");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    throw ConfigError("train: lr_decay_factor must lie in (0, 1]");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"lr", lr0},
          {"lr_decay_factor", lr_decay_factor},
          {"lr_decay_every", lr_decay_every},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"adam_beta1", adam.beta1},
          {"adam_beta2", adam.beta2},
          {"adam_eps", adam.epsilon},
          {"seed", seed},
          {"log_elapsed", log_elapsed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.lr0 = j.at("lr").get<double>();
    c.lr_decay_factor = j.at("lr_decay_factor").get<double>();
    c.lr_decay_every = j.at("lr_decay_every").get<std::size_t>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.adam.beta1 = j.at("adam_beta1").get<double>();
    c.adam.beta2 = j.at("adam_beta2").get<double>();
    c.adam.epsilon = j.at("adam_eps").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.log_elapsed = j.at("log_elapsed").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("train config: {}", e.what()));
  }
  return c;
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  const auto decays = static_cast<double>(epoch / cfg.lr_decay_every);
  const double raw = cfg.lr0 * std::pow(cfg.lr_decay_factor, decays);
  // Round to 15 significant digits so decimal schedules land on the nearest
  // double (1e-3 * 0.9 gives 9e-4, not 9.000000000000001e-4).
  const std::string text = fmt::format("{:.15g}", raw);
  double lr = raw;
  std::from_chars(text.data(), text.data() + text.size(), lr);
  return lr;
}

EarlyStopDecision early_stop_check(std::span<const double> history,
                                   std::size_t patience) {
  if (history.empty()) throw ValidationError("early_stop_check: empty history");
  const auto best = std::max_element(history.begin(), history.end());
  EarlyStopDecision d;
  d.best_epoch = static_cast<std::size_t>(best - history.begin());
  d.stop = (history.size() - 1) - d.best_epoch >= patience;
  return d;
}

std::string epoch_log_header(bool include_elapsed) {
  std::string h = "epoch\tlr\ttrain_loss\tvalid_ks_pct\tvalid_auc_pct";
  if (include_elapsed) h += "\telapsed_s";
  return h;
}

std::string epoch_log_line(const EpochRecord& r, bool include_elapsed) {
  std::string line = fmt::format("{}\t{:.6g}\t{:.8f}\t{:.4f}\t{:.4f}", r.epoch, r.lr,
                                 r.train_loss, 100.0 * r.valid_ks, 100.0 * r.valid_auc);
  if (include_elapsed) line += fmt::format("\t{:.3f}", r.elapsed_seconds);
  return line;
}

std::vector<std::pair<std::size_t, std::size_t>> minibatch_ranges(std::size_t rows,
                                                                  std::size_t batch_size) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t begin = 0; begin < rows; begin += batch_size) {
    out.emplace_back(begin, std::min(rows, begin + batch_size));
  }
  if (out.size() > 1 && out.back().second - out.back().first < 2) {
    const std::size_t end = out.back().second;
    out.pop_back();
    out.back().second = end;
  }
  return out;
}

namespace {

void check_split(const LabelledMatrix& d, const char* name) {
  if (d.x.rows() == 0 || d.x.rows() != d.y.size()) {
    throw ValidationError(fmt::format("train: {} split is empty or misaligned", name));
  }
}

}  // namespace

TrainResult train(TkgmlpModel& model, const LabelledMatrix& train_data,
                  const LabelledMatrix& valid_data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  check_split(train_data, "train");
  check_split(valid_data, "valid");
  if (train_data.x.rows() < 2) throw ValidationError("train: need at least 2 rows");
  {
    // Fails early if the validation labels are single-class.
    const std::vector<double> probe(valid_data.y.size(), 0.0);
    auc_score(probe, valid_data.y);
  }

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = train_data.x.rows();
  const auto batches = minibatch_ranges(n, cfg.batch_size);
  const std::uint64_t shuffle_stream = derive_seed(cfg.seed, 0x5348);
  const std::uint64_t dropout_stream = derive_seed(cfg.seed, 0xD409);

  TrainResult result;
  TkgmlpModel best = model;
  std::vector<double> ks_history;
  AdamState adam;
  std::vector<std::size_t> order(n);
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(shuffle_stream, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    bool diverged = false;
    try {
      for (const auto& [begin, end] : batches) {
        const std::span<const std::size_t> idx(order.data() + begin, end - begin);
        const Matrix xb = train_data.x.gather_rows(idx);
        Matrix yb(idx.size(), 1);
        for (std::size_t i = 0; i < idx.size(); ++i) yb(i, 0) = train_data.y[idx[i]];

        ModelCache cache;
        const Matrix scores = forward(model, xb, Mode::kTrain,
                                      derive_seed(dropout_stream, step++), &cache);
        const LossResult loss = bce_loss(scores, yb);
        if (!std::isfinite(loss.loss)) {
          throw NumericError(fmt::format("non-finite loss at epoch {}", epoch));
        }
        loss_sum += loss.loss * static_cast<double>(idx.size());
        model.zero_grad();
        backward_from_logits(model, bce_logit_grad(scores, yb), cache);
        adam_step(model.parameters(), adam, lr, cfg.adam);
      }
    } catch (const NumericError& e) {
      result.message = e.what();
      diverged = true;
    }
    if (diverged) {
      result.diverged = true;
      model = best;
      break;
    }

    const std::vector<double> scores = predict(model, valid_data.x);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(n);
    bool finite_scores = std::all_of(scores.begin(), scores.end(),
                                     [](double s) { return std::isfinite(s); });
    if (!finite_scores) {
      result.diverged = true;
      result.message = fmt::format("non-finite validation scores at epoch {}", epoch);
      model = best;
      break;
    }
    const MetricReport report = evaluate_scores(scores, valid_data.y);
    rec.valid_ks = report.ks;
    rec.valid_auc = report.auc;
    rec.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    ks_history.push_back(rec.valid_ks);
    if (on_epoch) on_epoch(rec);

    const EarlyStopDecision decision = early_stop_check(ks_history, cfg.patience);
    if (decision.best_epoch == epoch) best = model;
    if (decision.stop) {
      result.stopped_early = true;
      break;
    }
  }

  if (!result.history.empty()) {
    const EarlyStopDecision d = early_stop_check(ks_history, cfg.patience);
    result.best_epoch = d.best_epoch;
    result.best_ks = result.history[d.best_epoch].valid_ks;
    result.best_auc = result.history[d.best_epoch].valid_auc;
  }
  model = std::move(best);
  return result;
}

}  // namespace tkgmlp
