#include "tkgmlp/model.h"

#include <algorithm>

#include <fmt/format.h>

#include "tkgmlp/activations.h"
#include "tkgmlp/dropout.h"
#include "tkgmlp/error.h"
#include "tkgmlp/random.h"

namespace tkgmlp {
namespace {

// Seed streams for the layers of one model.
enum SeedSlot : std::uint64_t { kKanSlot = 100, kGmlpSlot = 200, kHeadSlot = 300 };

std::size_t kan_dropout_sites(const ModelConfig& cfg) {
  if (cfg.kan_layers == 0) return 0;
  return cfg.dropout_after_each_kan ? cfg.kan_layers : 1;
}

bool has_kan_dropout_after(const ModelConfig& cfg, std::size_t layer) {
  return cfg.dropout_after_each_kan || layer + 1 == cfg.kan_layers;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0) throw ConfigError("model: input_dim must be > 0");
  if (kan_layers == 0 && gmlp_layers == 0) {
    throw ConfigError("model: needs at least one KAN layer or gMLP block");
  }
  if (hidden_dim == 0) throw ConfigError("model: hidden_dim must be > 0");
  if (grid_size == 0) throw ConfigError("model: grid_size must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError(fmt::format("model: dropout {} outside [0, 1)", dropout));
  }
  if (!(spline_lo < spline_hi)) throw ConfigError("model: spline range is empty");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"input_dim", input_dim},
          {"kan_layers", kan_layers},
          {"gmlp_layers", gmlp_layers},
          {"hidden_dim", hidden_dim},
          {"grid_size", grid_size},
          {"spline_degree", spline_degree},
          {"dropout", dropout},
          {"spline_range", {spline_lo, spline_hi}},
          {"dropout_after_each_kan", dropout_after_each_kan}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.kan_layers = j.at("kan_layers").get<std::size_t>();
    c.gmlp_layers = j.at("gmlp_layers").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.grid_size = j.at("grid_size").get<std::size_t>();
    c.spline_degree = j.at("spline_degree").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.spline_lo = j.at("spline_range").at(0).get<double>();
    c.spline_hi = j.at("spline_range").at(1).get<double>();
    c.dropout_after_each_kan = j.at("dropout_after_each_kan").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("model config: {}", e.what()));
  }
  return c;
}

std::vector<ParamView> TkgmlpModel::parameters() {
  std::vector<ParamView> out;
  input_bn.append_params("input_bn", out);
  for (std::size_t i = 0; i < kan.size(); ++i) kan[i].append_params(fmt::format("kan.{}", i), out);
  for (std::size_t i = 0; i < gmlp.size(); ++i) {
    gmlp[i].append_params(fmt::format("gmlp.{}", i), out);
  }
  head.append_params("head", out);
  return out;
}

std::size_t TkgmlpModel::parameter_count() {
  std::size_t n = 0;
  for (const ParamView& p : parameters()) n += p.value.size();
  return n;
}

void TkgmlpModel::zero_grad() {
  input_bn.zero_grad();
  for (auto& k : kan) k.zero_grad();
  for (auto& g : gmlp) g.zero_grad();
  head.zero_grad();
}

TkgmlpModel build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  TkgmlpModel m;
  m.config = cfg;
  m.input_bn = batchnorm_init(cfg.input_dim);
  std::size_t dim = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.kan_layers; ++i) {
    m.kan.push_back(kan_init(dim, cfg.hidden_dim, cfg.grid_size, cfg.spline_degree,
                             cfg.spline_lo, cfg.spline_hi,
                             derive_seed(seed, kKanSlot + i)));
    dim = cfg.hidden_dim;
  }
  for (std::size_t i = 0; i < cfg.gmlp_layers; ++i) {
    m.gmlp.push_back(gmlp_block_init(dim, cfg.hidden_dim, cfg.dropout,
                                     derive_seed(seed, kGmlpSlot + i)));
    dim = cfg.hidden_dim;
  }
  m.head = linear_init(dim, 1, derive_seed(seed, kHeadSlot));
  return m;
}

Matrix forward(TkgmlpModel& model, const Matrix& x, Mode mode,
               std::uint64_t step_seed, ModelCache* cache) {
  const ModelConfig& cfg = model.config;
  if (x.cols() != cfg.input_dim) {
    throw ShapeError(fmt::format("model: input has {} cols, expected {}", x.cols(),
                                 cfg.input_dim));
  }
  if (cache) {
    cache->mode = mode;
    cache->kan.assign(model.kan.size(), KanCache{});
    cache->kan_dropout_masks.clear();
    cache->gmlp.assign(model.gmlp.size(), GmlpBlockCache{});
  }
  model.input_bn.mode = mode;
  Matrix h = batchnorm_apply(x, model.input_bn, cache ? &cache->input_bn : nullptr);

  std::size_t site = 0;
  for (std::size_t i = 0; i < model.kan.size(); ++i) {
    h = kan_forward(h, model.kan[i], cache ? &cache->kan[i] : nullptr);
    if (has_kan_dropout_after(cfg, i)) {
      DropoutResult d = dropout_apply(
          h, DropoutSpec{cfg.dropout, derive_seed(step_seed, site), mode});
      ++site;
      h = std::move(d.output);
      if (cache) cache->kan_dropout_masks.push_back(std::move(d.mask));
    }
  }
  for (std::size_t i = 0; i < model.gmlp.size(); ++i) {
    h = gmlp_block_forward(h, model.gmlp[i], mode, derive_seed(step_seed, 1000 + i),
                           cache ? &cache->gmlp[i] : nullptr);
  }
  Matrix scores = linear_forward(h, model.head, cache ? &cache->head : nullptr);
  for (double& v : scores.values()) v = sigmoid(v);
  if (cache) cache->scores = scores;
  return scores;
}

std::vector<double> predict(TkgmlpModel& model, const Matrix& x,
                            std::size_t chunk_rows) {
  std::vector<double> out;
  out.reserve(x.rows());
  for (std::size_t begin = 0; begin < x.rows(); begin += chunk_rows) {
    const std::size_t end = std::min(x.rows(), begin + chunk_rows);
    const Matrix s = forward(model, x.slice_rows(begin, end), Mode::kInference);
    out.insert(out.end(), s.values().begin(), s.values().end());
  }
  return out;
}

void backward_from_logits(TkgmlpModel& model, const Matrix& logit_grad,
                          const ModelCache& cache) {
  if (cache.mode != Mode::kTrain) {
    throw ValidationError("model backward: cache comes from an inference-mode forward");
  }
  if (cache.kan.size() != model.kan.size() || cache.gmlp.size() != model.gmlp.size() ||
      cache.kan_dropout_masks.size() != kan_dropout_sites(model.config)) {
    throw ShapeError("model backward: cache does not match the model");
  }
  Matrix g = linear_backward(logit_grad, cache.head, model.head);
  for (std::size_t i = model.gmlp.size(); i-- > 0;) {
    g = gmlp_block_backward(g, cache.gmlp[i], model.gmlp[i]);
  }
  std::size_t site = cache.kan_dropout_masks.size();
  for (std::size_t i = model.kan.size(); i-- > 0;) {
    if (has_kan_dropout_after(model.config, i)) {
      g = dropout_backward(g, cache.kan_dropout_masks[--site]);
    }
    g = kan_backward(g, cache.kan[i], model.kan[i]);
  }
  batchnorm_backward(g, cache.input_bn, model.input_bn);
}

void backward(TkgmlpModel& model, const Matrix& score_grad, const ModelCache& cache) {
  if (score_grad.rows() != cache.scores.rows() || score_grad.cols() != 1) {
    throw ShapeError("model backward: score gradient shape mismatch");
  }
  Matrix logit_grad(score_grad.rows(), 1);
  for (std::size_t r = 0; r < score_grad.rows(); ++r) {
    const double s = cache.scores(r, 0);
    logit_grad(r, 0) = score_grad(r, 0) * s * (1.0 - s);
  }
  backward_from_logits(model, logit_grad, cache);
}

}  // namespace tkgmlp
