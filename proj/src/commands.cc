#include "tkgmlp/commands.h"

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tkgmlp/csv.h"
#include "tkgmlp/error.h"
#include "tkgmlp/synthetic.h"

namespace tkgmlp {
namespace {

namespace fs = std::filesystem;

Dataset slice(const Dataset& ds, std::size_t begin, std::size_t end) {
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return ds.subset(rows);
}

std::vector<double> slice(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void print_report(std::ostream& out, std::string_view prefix, const MetricReport& r) {
  fmt::print(out, "{}ks={}\n{}auc={}\n", prefix, format_percent(r.ks), prefix, format_percent(r.auc));
}

}  // namespace

LogLevel log_level_from_env() {
  const char* v = std::getenv("TKGMLP_LOG");
  if (v == nullptr) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::kQuiet;
  if (s == "debug" || s == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void Logger::info(std::string_view msg) const {
  if (sink != nullptr && level >= LogLevel::kInfo) *sink << msg << '\n';
}

void Logger::debug(std::string_view msg) const {
  if (sink != nullptr && level >= LogLevel::kDebug) *sink << msg << '\n';
}

PreparedData prepare_data(const RunConfig& cfg) {
  PreparedData p;
  const DataConfig& d = cfg.data;
  if (d.source == "synth") {
    const std::size_t n = d.train_rows + d.valid_rows + d.test_rows;
    SyntheticData s = synth_generate(cfg.synth_task(), n);
    const std::size_t a = d.train_rows;
    const std::size_t b = a + d.valid_rows;
    p.split.train = slice(s.dataset, 0, a);
    p.split.valid = slice(s.dataset, a, b);
    p.split.test = slice(s.dataset, b, n);
    p.has_test = d.test_rows > 0;
    p.oracle_train = slice(s.oracle_probs, 0, a);
    p.oracle_valid = slice(s.oracle_probs, a, b);
    p.oracle_test = slice(s.oracle_probs, b, n);
    p.schema.label = "label";
    p.schema.time = "time";
  } else {
    p.schema = d.schema;
    if (!d.csv.empty()) {
      p.split = chronological_split(load_csv(d.csv, d.schema), d.split);
      p.has_test = true;
    } else {
      p.split.train = load_csv(d.train_csv, d.schema);
      p.split.valid = load_csv(d.valid_csv, d.schema);
      if (!d.test_csv.empty()) {
        p.split.test = load_csv(d.test_csv, d.schema);
        p.has_test = true;
      }
    }
  }
  return p;
}

LabelledMatrix encode_labelled(const EncoderSpec& enc, const Dataset& ds) {
  return {enc.transform(ds), ds.labels};
}

FitOutcome fit_run(const RunConfig& cfg, const PreparedData& data, const Logger& log,
                   std::ostream* log_file) {
  const EncoderSpec enc = EncoderSpec::fit(data.split.train, cfg.encoder.kind, cfg.encoder.n_bins);
  const LabelledMatrix train_m = encode_labelled(enc, data.split.train);
  const LabelledMatrix valid_m = encode_labelled(enc, data.split.valid);
  log.info(fmt::format("encoder {} n_bins={} width={} train_rows={} valid_rows={}",
                       encoder_kind_name(enc.kind()), cfg.encoder.n_bins, enc.output_dim(),
                       train_m.x.rows(), valid_m.x.rows()));

  ModelConfig mc = cfg.model;
  mc.input_dim = enc.output_dim();
  TkgmlpModel model = build_model(mc, cfg.seed);
  log.info(fmt::format("model M={} N={} hidden={} grid={} dropout={} params={}", mc.kan_layers,
                       mc.gmlp_layers, mc.hidden_dim, mc.grid_size, mc.dropout,
                       model.parameter_count()));

  if (log_file != nullptr) *log_file << epoch_log_header(cfg.train.log_elapsed) << '\n';
  const auto on_epoch = [&](const EpochRecord& r) {
    const std::string line = epoch_log_line(r, cfg.train.log_elapsed);
    if (log_file != nullptr) *log_file << line << '\n' << std::flush;
    log.info(line);
  };
  TrainResult result = train(model, train_m, valid_m, cfg.train, on_epoch);
  if (result.diverged) log.info(fmt::format("training diverged: {}", result.message));

  FitOutcome out{{cfg.to_json(), data.schema, enc, std::move(model), {}}, std::move(result), {}, {}, {}};
  out.checkpoint.meta = {out.result.best_epoch, out.result.best_ks, out.result.best_auc,
                         out.result.history.size(), out.result.stopped_early};
  out.valid = evaluate_scores(predict(out.checkpoint.model, valid_m.x), valid_m.y);
  if (data.has_test) {
    const LabelledMatrix test_m = encode_labelled(enc, data.split.test);
    out.test = evaluate_scores(predict(out.checkpoint.model, test_m.x), test_m.y);
  }
  if (!data.oracle_valid.empty()) {
    out.bayes_valid = bayes_metrics(data.oracle_valid, data.split.valid.labels);
  }
  return out;
}

MetricReport evaluate_checkpoint(Checkpoint& ck, const Dataset& ds) {
  const Matrix x = ck.encoder.transform(ds);
  return evaluate_scores(predict(ck.model, x), ds.labels);
}

void cmd_synth(const RunConfig& cfg, std::ostream& out, const Logger& log) {
  if (cfg.data.source != "synth") throw ConfigError("synth: data.source must be synth");
  const PreparedData p = prepare_data(cfg);
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  const std::pair<const char*, const Dataset*> parts[] = {
      {"train", &p.split.train}, {"valid", &p.split.valid}, {"test", &p.split.test}};
  for (const auto& [name, ds] : parts) {
    if (ds->rows() == 0) continue;
    const fs::path path = dir / fmt::format("{}.csv", name);
    write_csv(path, *ds, p.schema);
    log.info(fmt::format("wrote {} ({} rows, {} positives)", path.string(), ds->rows(), ds->positives()));
  }
  std::ofstream oracle = open_out(dir / "oracle.csv");
  oracle << "split,time,oracle_prob\n";
  const std::pair<const char*, std::pair<const Dataset*, const std::vector<double>*>> probs[] = {
      {"train", {&p.split.train, &p.oracle_train}},
      {"valid", {&p.split.valid, &p.oracle_valid}},
      {"test", {&p.split.test, &p.oracle_test}}};
  for (const auto& [name, pr] : probs) {
    for (std::size_t r = 0; r < pr.first->rows(); ++r) {
      oracle << name << ',' << format_double(pr.first->time[r]) << ','
             << format_double((*pr.second)[r]) << '\n';
    }
  }
  if (!oracle) throw IoError("write failed for oracle.csv");
  const MetricReport bayes = bayes_metrics(p.oracle_valid, p.split.valid.labels);
  fmt::print(out, "rows={}\n", p.split.train.rows() + p.split.valid.rows() + p.split.test.rows());
  print_report(out, "bayes_valid_", bayes);
}

FitOutcome cmd_fit(const RunConfig& cfg, std::ostream& out, const Logger& log) {
  const PreparedData data = prepare_data(cfg);
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  std::ofstream log_file = open_out(dir / "train_log.tsv");
  FitOutcome o = fit_run(cfg, data, log, &log_file);
  save_checkpoint(dir / "checkpoint.json", o.checkpoint);
  log.info(fmt::format("wrote {}", (dir / "checkpoint.json").string()));

  fmt::print(out, "best_epoch={}\nepochs_run={}\nstopped_early={}\n", o.result.best_epoch,
             o.result.history.size(), o.result.stopped_early ? 1 : 0);
  print_report(out, "valid_", o.valid);
  if (o.test) print_report(out, "test_", *o.test);
  if (o.bayes_valid) print_report(out, "bayes_valid_", *o.bayes_valid);
  if (o.result.diverged) throw NumericError(o.result.message);
  return o;
}

MetricReport cmd_evaluate(const fs::path& checkpoint, const fs::path& data_csv,
                          const RunConfig* cfg, std::string_view split, std::ostream& out,
                          const Logger& log) {
  Checkpoint ck = load_checkpoint(checkpoint);
  Dataset ds;
  if (!data_csv.empty()) {
    ds = load_csv(data_csv, ck.schema);
  } else {
    if (cfg == nullptr) throw ConfigError("evaluate: give --data or --config with --split");
    PreparedData p = prepare_data(*cfg);
    if (split == "train") {
      ds = std::move(p.split.train);
    } else if (split == "valid") {
      ds = std::move(p.split.valid);
    } else if (split == "test" && p.has_test) {
      ds = std::move(p.split.test);
    } else {
      throw ConfigError(fmt::format("evaluate: no '{}' split", split));
    }
  }
  log.debug(fmt::format("scoring {} rows", ds.rows()));
  const MetricReport r = evaluate_checkpoint(ck, ds);
  fmt::print(out, "rows={}\npositives={}\n", ds.rows(), r.positives);
  print_report(out, "", r);
  fmt::print(out, "ks_exact={}\nauc_exact={}\n", format_double(r.ks), format_double(r.auc));
  return r;
}

std::vector<GridResult> cmd_grid(const RunConfig& cfg, std::ostream& out, const Logger& log) {
  if (!cfg.grid) throw ConfigError("grid: config has no grid section");
  const PreparedData data = prepare_data(cfg);
  const EncoderSpec enc = EncoderSpec::fit(data.split.train, cfg.encoder.kind, cfg.encoder.n_bins);
  const LabelledMatrix train_m = encode_labelled(enc, data.split.train);
  const LabelledMatrix valid_m = encode_labelled(enc, data.split.valid);
  ModelConfig base = cfg.model;
  base.input_dim = enc.output_dim();
  log.info(fmt::format("grid of {} configurations, base seed {}", cfg.grid->size(), cfg.seed));

  const auto results = grid_search(*cfg.grid, base, train_m, valid_m, cfg.train,
                                   [&](const GridResult& r) {
                                     log.info(fmt::format(
                                         "config {} seed=derive_seed({}, {})={} ok={} ks={} auc={}",
                                         r.config_index, cfg.seed, r.config_index, r.seed,
                                         r.ok ? 1 : 0, format_percent(r.valid_ks),
                                         format_percent(r.valid_auc)));
                                   });
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  std::ofstream tsv = open_out(dir / "grid_results.tsv");
  tsv << grid_results_tsv(results);
  if (!tsv) throw IoError("write failed for grid_results.tsv");
  out << grid_results_tsv(results);
  return results;
}

void cmd_encode(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& data_csv,
                std::ostream& out, const Logger& log) {
  std::optional<PreparedData> data;
  EncoderSpec enc;
  CsvSchema schema = cfg.data.schema;
  if (!checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(checkpoint);
    enc = ck.encoder;
    schema = ck.schema;
  } else {
    data = prepare_data(cfg);
    enc = EncoderSpec::fit(data->split.train, cfg.encoder.kind, cfg.encoder.n_bins);
    schema = data->schema;
  }
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  const auto names = enc.output_names();
  if (!data_csv.empty()) {
    const Dataset ds = load_csv(data_csv, schema);
    write_matrix_csv(dir / "encoded.csv", enc.transform(ds), names, ds.labels);
    fmt::print(out, "encoded.csv rows={} cols={}\n", ds.rows(), names.size());
    return;
  }
  if (!data) data = prepare_data(cfg);
  const std::pair<const char*, const Dataset*> parts[] = {
      {"train", &data->split.train}, {"valid", &data->split.valid}, {"test", &data->split.test}};
  for (const auto& [name, ds] : parts) {
    if (ds->rows() == 0) continue;
    const fs::path path = dir / fmt::format("encoded_{}.csv", name);
    write_matrix_csv(path, enc.transform(*ds), names, ds->labels);
    log.info(fmt::format("wrote {}", path.string()));
    fmt::print(out, "encoded_{}.csv rows={} cols={}\n", name, ds->rows(), names.size());
  }
}

std::string format_percent(double fraction) { return fmt::format("{:.2f}", 100.0 * fraction); }

std::string grid_results_tsv(const std::vector<GridResult>& ranked) {
  std::string s =
      "rank\tconfig_index\tseed\tgmlp_layers\tkan_layers\tgrid_size\thidden_dim\tdropout\tok\t"
      "valid_ks_pct\tvalid_auc_pct\tbest_epoch\tepochs_run\terror\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const GridResult& r = ranked[i];
    s += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", i + 1,
                     r.config_index, r.seed, r.config.gmlp_layers, r.config.kan_layers,
                     r.config.grid_size, r.config.hidden_dim, r.config.dropout, r.ok ? 1 : 0,
                     format_percent(r.valid_ks), format_percent(r.valid_auc), r.best_epoch,
                     r.epochs_run, r.error);
  }
  return s;
}

void write_matrix_csv(const fs::path& path, const Matrix& x, const std::vector<std::string>& names,
                      const std::vector<double>& labels) {
  if (names.size() != x.cols() || labels.size() != x.rows()) {
    throw ShapeError("write_matrix_csv: names/labels do not match the matrix");
  }
  std::ofstream out = open_out(path);
  for (const auto& n : names) out << n << ',';
  out << "label\n";
  std::string line;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    line.clear();
    for (double v : x.row(r)) {
      line += format_double(v);
      line += ',';
    }
    line += labels[r] != 0.0 ? '1' : '0';
    line += '\n';
    out << line;
  }
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace tkgmlp
