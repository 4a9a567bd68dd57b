#include "tkgmlp/checkpoint.h"

#include <fstream>
#include <map>

#include <fmt/format.h>

#include "tkgmlp/error.h"

namespace tkgmlp {
namespace {

using nlohmann::json;

json bn_stats(const BatchNormState& bn) {
  return {{"running_mean", bn.running_mean}, {"running_var", bn.running_var}};
}

void load_bn_stats(const json& j, BatchNormState& bn, const std::string& name) {
  auto mean = j.at("running_mean").get<std::vector<double>>();
  auto var = j.at("running_var").get<std::vector<double>>();
  if (mean.size() != bn.running_mean.size() || var.size() != bn.running_var.size()) {
    throw IoError(fmt::format("checkpoint: running stats of '{}' have the wrong size", name));
  }
  bn.running_mean = std::move(mean);
  bn.running_var = std::move(var);
}

}  // namespace

json checkpoint_to_json(Checkpoint& ck) {
  json params = json::array();
  for (const ParamView& p : ck.model.parameters()) {
    params.push_back({{"name", p.name},
                      {"shape", p.shape},
                      {"values", std::vector<double>(p.value.begin(), p.value.end())}});
  }
  json bn = json::object();
  bn["input_bn"] = bn_stats(ck.model.input_bn);
  for (std::size_t i = 0; i < ck.model.gmlp.size(); ++i) {
    bn[fmt::format("gmlp.{}.bn", i)] = bn_stats(ck.model.gmlp[i].bn);
  }
  return {{"format", "tkgmlp-checkpoint"},
          {"format_version", kCheckpointFormatVersion},
          {"run_config", ck.run_config},
          {"schema", ck.schema.to_json()},
          {"encoder", ck.encoder.to_json()},
          {"model_config", ck.model.config.to_json()},
          {"params", params},
          {"bn_running_stats", bn},
          {"best",
           {{"epoch", ck.meta.best_epoch},
            {"valid_ks", ck.meta.best_valid_ks},
            {"valid_auc", ck.meta.best_valid_auc},
            {"epochs_run", ck.meta.epochs_run},
            {"stopped_early", ck.meta.stopped_early}}}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("format_version")) {
    throw IoError("checkpoint: missing format_version");
  }
  const json& version = j.at("format_version");
  if (!version.is_number_integer() || version.get<int>() != kCheckpointFormatVersion) {
    throw IoError(fmt::format("checkpoint: format version {} is not supported (expected {})",
                              version.dump(), kCheckpointFormatVersion));
  }
  try {
    Checkpoint ck{j.at("run_config"), CsvSchema::from_json(j.at("schema")),
                  EncoderSpec::from_json(j.at("encoder")),
                  build_model(ModelConfig::from_json(j.at("model_config")), 0), {}};

    std::map<std::string, const json*> by_name;
    for (const json& p : j.at("params")) by_name[p.at("name").get<std::string>()] = &p;
    for (ParamView& p : ck.model.parameters()) {
      const auto it = by_name.find(p.name);
      if (it == by_name.end()) throw IoError(fmt::format("checkpoint: missing tensor '{}'", p.name));
      const auto shape = it->second->at("shape").get<std::vector<std::size_t>>();
      const auto values = it->second->at("values").get<std::vector<double>>();
      if (shape != p.shape || values.size() != p.value.size()) {
        throw IoError(fmt::format("checkpoint: tensor '{}' has the wrong shape", p.name));
      }
      std::copy(values.begin(), values.end(), p.value.begin());
      by_name.erase(it);
    }
    if (!by_name.empty()) {
      throw IoError(fmt::format("checkpoint: unexpected tensor '{}'", by_name.begin()->first));
    }

    const json& bn = j.at("bn_running_stats");
    load_bn_stats(bn.at("input_bn"), ck.model.input_bn, "input_bn");
    for (std::size_t i = 0; i < ck.model.gmlp.size(); ++i) {
      const std::string name = fmt::format("gmlp.{}.bn", i);
      load_bn_stats(bn.at(name), ck.model.gmlp[i].bn, name);
    }

    const json& best = j.at("best");
    ck.meta.best_epoch = best.at("epoch").get<std::size_t>();
    ck.meta.best_valid_ks = best.at("valid_ks").get<double>();
    ck.meta.best_valid_auc = best.at("valid_auc").get<double>();
    ck.meta.epochs_run = best.at("epochs_run").get<std::size_t>();
    ck.meta.stopped_early = best.at("stopped_early").get<bool>();
    if (ck.encoder.output_dim() != ck.model.config.input_dim) {
      throw IoError("checkpoint: encoder width does not match model input_dim");
    }
    return ck;
  } catch (const json::exception& e) {
    throw IoError(fmt::format("checkpoint: {}", e.what()));
  } catch (const ConfigError& e) {
    throw IoError(fmt::format("checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const std::filesystem::path& path, Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << checkpoint_to_json(ck).dump(1) << '\n';
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint '{}'", path.string()));
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError(fmt::format("checkpoint '{}' is not valid JSON", path.string()));
  return checkpoint_from_json(j);
}

}  // namespace tkgmlp
