#include "tkgmlp/grid_search.h"

#include <algorithm>

#include <fmt/format.h>

#include "tkgmlp/error.h"
#include "tkgmlp/random.h"

namespace tkgmlp {

GridSpace GridSpace::standard() {
  return GridSpace{{1, 2}, {1, 2}, {5, 10}, {512, 1024, 2048}, {0.0, 0.3, 0.5, 0.7}};
}

std::size_t GridSpace::size() const {
  return gmlp_layers.size() * kan_layers.size() * grid_size.size() * hidden_dim.size() *
         dropout.size();
}

ModelConfig GridSpace::at(std::size_t index, const ModelConfig& base) const {
  if (index >= size()) throw ConfigError(fmt::format("grid index {} out of range", index));
  ModelConfig c = base;
  std::size_t rest = index;
  c.dropout = dropout[rest % dropout.size()];
  rest /= dropout.size();
  c.hidden_dim = hidden_dim[rest % hidden_dim.size()];
  rest /= hidden_dim.size();
  c.grid_size = grid_size[rest % grid_size.size()];
  rest /= grid_size.size();
  c.kan_layers = kan_layers[rest % kan_layers.size()];
  rest /= kan_layers.size();
  c.gmlp_layers = gmlp_layers[rest];
  return c;
}

nlohmann::json GridSpace::to_json() const {
  return {{"gmlp_layers", gmlp_layers},
          {"kan_layers", kan_layers},
          {"grid_size", grid_size},
          {"hidden_dim", hidden_dim},
          {"dropout", dropout}};
}

GridSpace GridSpace::from_json(const nlohmann::json& j) {
  GridSpace s;
  try {
    s.gmlp_layers = j.at("gmlp_layers").get<std::vector<std::size_t>>();
    s.kan_layers = j.at("kan_layers").get<std::vector<std::size_t>>();
    s.grid_size = j.at("grid_size").get<std::vector<std::size_t>>();
    s.hidden_dim = j.at("hidden_dim").get<std::vector<std::size_t>>();
    s.dropout = j.at("dropout").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("grid: {}", e.what()));
  }
  if (s.size() == 0) throw ConfigError("grid: every hyperparameter needs a candidate");
  return s;
}

void rank_grid_results(std::vector<GridResult>& results) {
  std::sort(results.begin(), results.end(), [](const GridResult& a, const GridResult& b) {
    if (a.ok != b.ok) return a.ok;
    if (a.ok) {
      if (a.valid_ks != b.valid_ks) return a.valid_ks > b.valid_ks;
      if (a.valid_auc != b.valid_auc) return a.valid_auc > b.valid_auc;
    }
    return a.config_index < b.config_index;
  });
}

std::vector<GridResult> grid_search(
    const GridSpace& space, const ModelConfig& base, const LabelledMatrix& train_data,
    const LabelledMatrix& valid_data, const TrainConfig& cfg,
    const std::function<void(const GridResult&)>& on_result) {
  std::vector<GridResult> results;
  results.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    GridResult r;
    r.config_index = i;
    r.seed = derive_seed(cfg.seed, i);
    r.config = space.at(i, base);
    try {
      TkgmlpModel model = build_model(r.config, r.seed);
      TrainConfig run_cfg = cfg;
      run_cfg.seed = r.seed;
      const TrainResult tr = train(model, train_data, valid_data, run_cfg);
      r.epochs_run = tr.history.size();
      r.best_epoch = tr.best_epoch;
      r.valid_ks = tr.best_ks;
      r.valid_auc = tr.best_auc;
      r.ok = !tr.diverged && !tr.history.empty();
      if (!r.ok) r.error = tr.message.empty() ? "no completed epoch" : tr.message;
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  rank_grid_results(results);
  return results;
}

}  // namespace tkgmlp
