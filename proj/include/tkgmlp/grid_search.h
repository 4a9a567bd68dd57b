#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkgmlp/model.h"
#include "tkgmlp/trainer.h"

namespace tkgmlp {

// Candidate values per hyperparameter. Configurations are enumerated as a
// cartesian product with gmlp_layers outermost and dropout innermost.
struct GridSpace {
  std::vector<std::size_t> gmlp_layers;
  std::vector<std::size_t> kan_layers;
  std::vector<std::size_t> grid_size;
  std::vector<std::size_t> hidden_dim;
  std::vector<double> dropout;

  // The full TKGMLP search space: MLP layers {1,2}, KAN layers {1,2}, grid
  // size {5,10}, hidden dim {512,1024,2048}, dropout {0,0.3,0.5,0.7}.
  static GridSpace standard();

  std::size_t size() const;
  // Configuration `index` layered over `base` (which supplies input_dim,
  // spline settings and the dropout placement).
  ModelConfig at(std::size_t index, const ModelConfig& base) const;

  nlohmann::json to_json() const;
  static GridSpace from_json(const nlohmann::json& j);
};

struct GridResult {
  std::size_t config_index = 0;
  std::uint64_t seed = 0;
  ModelConfig config;
  bool ok = false;
  std::string error;
  double valid_ks = 0.0;
  double valid_auc = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

// Trains every configuration with seed derive_seed(cfg.seed, index) (used for
// both initialization and training). A configuration that throws or diverges
// is recorded with ok = false and does not abort the search. Results are
// ranked: successful runs by validation KS desc, AUC desc, index asc, then
// failures by index.
std::vector<GridResult> grid_search(
    const GridSpace& space, const ModelConfig& base, const LabelledMatrix& train_data,
    const LabelledMatrix& valid_data, const TrainConfig& cfg,
    const std::function<void(const GridResult&)>& on_result = {});

void rank_grid_results(std::vector<GridResult>& results);

}  // namespace tkgmlp
