#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tkgmlp/batch_norm.h"
#include "tkgmlp/common.h"
#include "tkgmlp/gmlp_block.h"
#include "tkgmlp/kan_layer.h"
#include "tkgmlp/linear.h"
#include "tkgmlp/matrix.h"

namespace tkgmlp {

struct ModelConfig {
  std::size_t input_dim = 0;
  std::size_t kan_layers = 1;
  std::size_t gmlp_layers = 1;
  std::size_t hidden_dim = 64;
  std::size_t grid_size = 5;
  std::size_t spline_degree = 3;
  double dropout = 0.0;
  double spline_lo = -1.0;
  double spline_hi = 1.0;
  // Dropout after every KAN layer (true) or once after the whole stack.
  bool dropout_after_each_kan = true;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// input BatchNorm -> M KAN layers (+ dropout) -> N gMLP blocks -> linear head
// -> sigmoid.
struct TkgmlpModel {
  ModelConfig config;
  BatchNormState input_bn;
  std::vector<KanLayerParams> kan;
  std::vector<GmlpBlockParams> gmlp;
  LinearParams head;

  std::vector<ParamView> parameters();
  // Trainable scalars (excludes batch-norm running statistics).
  std::size_t parameter_count();
  void zero_grad();
};

TkgmlpModel build_model(const ModelConfig& cfg, std::uint64_t seed);

struct ModelCache {
  Mode mode = Mode::kInference;
  BatchNormCache input_bn;
  std::vector<KanCache> kan;
  std::vector<Matrix> kan_dropout_masks;  // one per KAN dropout site
  std::vector<GmlpBlockCache> gmlp;
  LinearCache head;
  Matrix scores;  // (rows x 1)
};

// Scores in (0, 1), one per row. In train mode the batch-norm running stats
// are updated and dropout masks are drawn from seeds derived from
// `step_seed`.
Matrix forward(TkgmlpModel& model, const Matrix& x, Mode mode,
               std::uint64_t step_seed = 0, ModelCache* cache = nullptr);

// Score vector for a whole table in inference mode, evaluated in row chunks.
std::vector<double> predict(TkgmlpModel& model, const Matrix& x,
                            std::size_t chunk_rows = 8192);

// Reverse pass from dL/dscores. Throws ValidationError for an inference-mode
// cache.
void backward(TkgmlpModel& model, const Matrix& score_grad, const ModelCache& cache);

// Same, starting from dL/dlogits (the head output before the sigmoid).
void backward_from_logits(TkgmlpModel& model, const Matrix& logit_grad,
                          const ModelCache& cache);

}  // namespace tkgmlp
