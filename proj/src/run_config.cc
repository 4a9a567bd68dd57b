#include "tkgmlp/run_config.h"

#include <fstream>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {
namespace {

using nlohmann::json;

// Recursive overlay. A null default accepts any value; objects merge key by
// key; anything else is replaced.
void merge_strict(json& base, const json& over, const std::string& path) {
  if (!over.is_object()) {
    throw ConfigError(fmt::format("config: '{}' must be an object", path.empty() ? "<root>" : path));
  }
  for (const auto& [key, value] : over.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError(fmt::format("config: unknown key '{}'", here));
    json& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_strict(slot, value, here);
    } else {
      slot = value;
    }
  }
}

json model_defaults() {
  ModelConfig m;
  m.kan_layers = 1;
  m.gmlp_layers = 2;
  m.hidden_dim = 64;
  m.grid_size = 5;
  m.dropout = 0.3;
  json j = m.to_json();
  j.erase("input_dim");
  return j;
}

json train_defaults() {
  json j = TrainConfig{}.to_json();
  j.erase("seed");
  return j;
}

template <typename T>
T get_as(const json& j, const char* key, const char* section) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}.{}: {}", section, key, e.what()));
  }
}

}  // namespace

json RunConfig::defaults_json() {
  const DataConfig d;
  return {
      {"seed", 42},
      {"output_dir", "tkgmlp_out"},
      {"data",
       {{"source", d.source},
        {"preset", d.preset},
        {"synth_spec", nullptr},
        {"train_rows", d.train_rows},
        {"valid_rows", d.valid_rows},
        {"test_rows", d.test_rows},
        {"csv", ""},
        {"split", d.split},
        {"train_csv", ""},
        {"valid_csv", ""},
        {"test_csv", ""},
        {"schema", d.schema.to_json()}}},
      {"encoder", {{"kind", "qle"}, {"n_bins", 64}}},
      {"model", model_defaults()},
      {"grid", nullptr},
      {"train", train_defaults()},
  };
}

RunConfig RunConfig::from_json(const json& j) {
  json doc = defaults_json();
  merge_strict(doc, j, "");

  RunConfig c;
  c.seed = get_as<std::uint64_t>(doc, "seed", "run");
  c.output_dir = get_as<std::string>(doc, "output_dir", "run");

  const json& d = doc.at("data");
  c.data.source = get_as<std::string>(d, "source", "data");
  c.data.preset = get_as<std::string>(d, "preset", "data");
  if (!d.at("synth_spec").is_null()) {
    c.data.synth_spec = SyntheticTaskSpec::from_json(d.at("synth_spec"));
  }
  c.data.train_rows = get_as<std::size_t>(d, "train_rows", "data");
  c.data.valid_rows = get_as<std::size_t>(d, "valid_rows", "data");
  c.data.test_rows = get_as<std::size_t>(d, "test_rows", "data");
  c.data.csv = get_as<std::string>(d, "csv", "data");
  c.data.split = get_as<std::array<double, 3>>(d, "split", "data");
  c.data.train_csv = get_as<std::string>(d, "train_csv", "data");
  c.data.valid_csv = get_as<std::string>(d, "valid_csv", "data");
  c.data.test_csv = get_as<std::string>(d, "test_csv", "data");
  c.data.schema = CsvSchema::from_json(d.at("schema"));

  const json& e = doc.at("encoder");
  c.encoder.kind = parse_encoder_kind(get_as<std::string>(e, "kind", "encoder"));
  c.encoder.n_bins = get_as<std::size_t>(e, "n_bins", "encoder");

  json model = doc.at("model");
  model["input_dim"] = 0;
  c.model = ModelConfig::from_json(model);
  if (!doc.at("grid").is_null()) c.grid = GridSpace::from_json(doc.at("grid"));

  json train = doc.at("train");
  train["seed"] = c.seed;
  c.train = TrainConfig::from_json(train);

  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json model_j = model.to_json();
  model_j.erase("input_dim");
  json train_j = train.to_json();
  train_j.erase("seed");
  return {
      {"seed", seed},
      {"output_dir", output_dir},
      {"data",
       {{"source", data.source},
        {"preset", data.preset},
        {"synth_spec", data.synth_spec ? data.synth_spec->to_json() : json(nullptr)},
        {"train_rows", data.train_rows},
        {"valid_rows", data.valid_rows},
        {"test_rows", data.test_rows},
        {"csv", data.csv},
        {"split", data.split},
        {"train_csv", data.train_csv},
        {"valid_csv", data.valid_csv},
        {"test_csv", data.test_csv},
        {"schema", data.schema.to_json()}}},
      {"encoder", {{"kind", std::string(encoder_kind_name(encoder.kind))}, {"n_bins", encoder.n_bins}}},
      {"model", model_j},
      {"grid", grid ? grid->to_json() : json(nullptr)},
      {"train", train_j},
  };
}

void RunConfig::validate() const {
  if (output_dir.empty()) throw ConfigError("config: output_dir is empty");
  if (data.source == "synth") {
    if (!data.synth_spec && data.preset != "desk_tiny" && data.preset != "zip_heavy") {
      throw ConfigError(fmt::format("config: unknown synthetic preset '{}'", data.preset));
    }
    if (data.train_rows < 2 || data.valid_rows < 2) {
      throw ConfigError("config: synthetic train and valid need at least 2 rows each");
    }
    synth_task().validate();
  } else if (data.source == "csv") {
    const bool three = !data.train_csv.empty();
    if (three == !data.csv.empty()) {
      throw ConfigError("config: csv data needs either data.csv or data.train_csv, not both");
    }
    if (three && data.valid_csv.empty()) throw ConfigError("config: data.valid_csv is required");
    if (!three) {
      double sum = 0.0;
      for (double f : data.split) {
        if (!(f > 0.0)) throw ConfigError("config: split fractions must be positive");
        sum += f;
      }
      if (sum > 1.0 + 1e-12) throw ConfigError("config: split fractions sum above 1");
    }
  } else {
    throw ConfigError(fmt::format("config: data.source must be synth or csv, got '{}'", data.source));
  }
  if (encoder.n_bins < 1) throw ConfigError("config: encoder.n_bins must be >= 1");
  ModelConfig probe = model;
  probe.input_dim = 1;
  probe.validate();
  if (grid) {
    for (std::size_t i = 0; i < grid->size(); ++i) grid->at(i, probe).validate();
  }
  train.validate();
}

SyntheticTaskSpec RunConfig::synth_task() const {
  SyntheticTaskSpec s;
  if (data.synth_spec) {
    s = *data.synth_spec;
  } else if (data.preset == "zip_heavy") {
    s = SyntheticTaskSpec::zip_heavy(seed);
  } else {
    s = SyntheticTaskSpec::desk_tiny(seed);
  }
  s.seed = seed;
  return s;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(fmt::format("override '{}': empty key segment", key));
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    doc = json::parse(in, nullptr, false, true);
    if (doc.is_discarded()) throw ConfigError(fmt::format("config '{}' is not valid JSON", path.string()));
  }
  for (const auto& o : overrides) apply_override(doc, o);
  if (seed) doc["seed"] = *seed;
  return RunConfig::from_json(doc);
}

}  // namespace tkgmlp
