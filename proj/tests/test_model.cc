#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "support/oracles.h"
#include "tkgmlp/activations.h"
#include "tkgmlp/error.h"
#include "tkgmlp/init.h"
#include "tkgmlp/loss.h"
#include "tkgmlp/model.h"
#include "tkgmlp/random.h"

namespace tkgmlp {
namespace {

using testing::numeric_grad;
using testing::rel_error;

ModelConfig tiny_config() {
  ModelConfig c;
  c.input_dim = 6;
  c.kan_layers = 1;
  c.gmlp_layers = 1;
  c.hidden_dim = 8;
  c.grid_size = 5;
  c.dropout = 0.3;
  return c;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  return init_params(r, c, InitScheme::kUniform, seed, scale);
}

Matrix labels_for(std::size_t rows) {
  Matrix y(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) y(r, 0) = (r % 3 == 0) ? 1.0 : 0.0;
  return y;
}

TEST(Model, ParameterCountArithmetic) {
  ModelConfig c;
  c.input_dim = 8;
  c.kan_layers = 1;
  c.gmlp_layers = 1;
  c.hidden_dim = 16;
  c.grid_size = 5;
  TkgmlpModel m = build_model(c, 1);
  const std::size_t expected = 2 * 8 + (8 * 16 * (5 + 3) + 2 * 8 * 16) +
                               (2 * 16 + 2 * 16 * 16 + 2 * 16) + (16 + 1);
  EXPECT_EQ(m.parameter_count(), expected);
}

TEST(Model, ConfigValidation) {
  ModelConfig c = tiny_config();
  c.kan_layers = 0;
  c.gmlp_layers = 0;
  EXPECT_THROW(build_model(c, 1), ConfigError);
  c = tiny_config();
  c.dropout = 1.0;
  EXPECT_THROW(build_model(c, 1), ConfigError);
  c = tiny_config();
  c.input_dim = 0;
  EXPECT_THROW(build_model(c, 1), ConfigError);
  c = tiny_config();
  EXPECT_EQ(ModelConfig::from_json(c.to_json()), c);
}

TEST(Model, DeterministicForward) {
  TkgmlpModel a = build_model(tiny_config(), 5);
  TkgmlpModel b = build_model(tiny_config(), 5);
  const Matrix x = random_matrix(10, 6, 3);
  EXPECT_EQ(forward(a, x, Mode::kInference), forward(b, x, Mode::kInference));
  EXPECT_EQ(forward(a, x, Mode::kInference), forward(a, x, Mode::kInference));
  EXPECT_EQ(forward(a, x, Mode::kTrain, 9), forward(b, x, Mode::kTrain, 9));
  TkgmlpModel c = build_model(tiny_config(), 6);
  EXPECT_NE(forward(a, x, Mode::kInference), forward(c, x, Mode::kInference));
}

TEST(Model, ZeroHeadGivesHalf) {
  TkgmlpModel m = build_model(tiny_config(), 5);
  m.head.weight.fill(0.0);
  const Matrix s = forward(m, random_matrix(7, 6, 3), Mode::kInference);
  for (double v : s.values()) EXPECT_EQ(v, 0.5);
}

TEST(Model, ScoresInUnitInterval) {
  TkgmlpModel m = build_model(tiny_config(), 5);
  const Matrix s = forward(m, random_matrix(50, 6, 3, 10.0), Mode::kTrain, 1);
  for (double v : s.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_THROW(forward(m, random_matrix(5, 7, 3), Mode::kInference), ShapeError);
}

TEST(Model, InferenceRowPermutation) {
  TkgmlpModel m = build_model(tiny_config(), 5);
  const Matrix x = random_matrix(12, 6, 3);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[7]);
  const Matrix s = forward(m, x, Mode::kInference);
  const Matrix sp = forward(m, x.gather_rows(perm), Mode::kInference);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(sp(i, 0), s(perm[i], 0));
  EXPECT_EQ(predict(m, x, 5), std::vector<double>(s.values().begin(), s.values().end()));
}

TEST(Model, GmlpOnlyAblationMatchesBlockComposition) {
  ModelConfig c = tiny_config();
  c.kan_layers = 0;
  c.gmlp_layers = 2;
  TkgmlpModel m = build_model(c, 7);
  const Matrix x = random_matrix(9, 6, 3);
  BatchNormState bn = m.input_bn;
  bn.mode = Mode::kInference;
  Matrix h = batchnorm_apply(x, bn);
  for (auto& g : m.gmlp) {
    GmlpBlockParams copy = g;
    h = gmlp_block_forward(h, copy, Mode::kInference, 0);
  }
  h = linear_forward(h, m.head);
  const Matrix s = forward(m, x, Mode::kInference);
  for (std::size_t r = 0; r < 9; ++r) EXPECT_EQ(s(r, 0), sigmoid(h(r, 0)));
}

TEST(Model, KanOnlyAblationMatchesComposition) {
  ModelConfig c = tiny_config();
  c.kan_layers = 2;
  c.gmlp_layers = 0;
  TkgmlpModel m = build_model(c, 7);
  const Matrix x = random_matrix(9, 6, 3);
  BatchNormState bn = m.input_bn;
  bn.mode = Mode::kInference;
  Matrix h = batchnorm_apply(x, bn);
  for (const auto& k : m.kan) h = kan_forward(h, k);
  h = linear_forward(h, m.head);
  const Matrix s = forward(m, x, Mode::kInference);
  for (std::size_t r = 0; r < 9; ++r) EXPECT_EQ(s(r, 0), sigmoid(h(r, 0)));
}

// Full-model gradient against finite differences of the BCE loss, with the
// dropout masks pinned by the step seed.
void check_end_to_end(const ModelConfig& cfg, std::uint64_t seed, double tol) {
  TkgmlpModel m = build_model(cfg, seed);
  Rng rng(seed);
  for (ParamView& p : m.parameters()) {
    if (p.name.find("spline_coeffs") != std::string::npos) {
      for (double& v : p.value) v = uniform01(rng) - 0.5;
    }
  }
  const Matrix x = random_matrix(10, cfg.input_dim, seed + 1, 2.0);
  const Matrix y = labels_for(10);
  const std::uint64_t step = 777 + seed;
  const auto loss = [&] {
    TkgmlpModel copy = m;
    return bce_loss(forward(copy, x, Mode::kTrain, step), y).loss;
  };
  TkgmlpModel run = m;
  ModelCache cache;
  const Matrix s = forward(run, x, Mode::kTrain, step, &cache);
  run.zero_grad();
  backward(run, bce_loss(s, y).grad, cache);
  auto analytic = run.parameters();
  auto params = m.parameters();
  ASSERT_EQ(analytic.size(), params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto fd = numeric_grad(loss, params[k].value);
    EXPECT_LT(rel_error(analytic[k].grad, fd), tol) << params[k].name << " seed " << seed;
  }
}

TEST(Model, EndToEndGradient) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) check_end_to_end(tiny_config(), seed, 1e-4);
}

TEST(Model, EndToEndGradientDeeperStacks) {
  ModelConfig c = tiny_config();
  c.kan_layers = 2;
  c.gmlp_layers = 2;
  check_end_to_end(c, 11, 1e-4);
  c.dropout_after_each_kan = false;
  check_end_to_end(c, 12, 1e-4);
}

TEST(Model, LogitBackwardMatchesScoreBackward) {
  TkgmlpModel a = build_model(tiny_config(), 3);
  TkgmlpModel b = a;
  const Matrix x = random_matrix(10, 6, 4);
  const Matrix y = labels_for(10);
  ModelCache ca;
  ModelCache cb;
  const Matrix sa = forward(a, x, Mode::kTrain, 5, &ca);
  forward(b, x, Mode::kTrain, 5, &cb);
  a.zero_grad();
  b.zero_grad();
  backward(a, bce_loss(sa, y).grad, ca);
  backward_from_logits(b, bce_logit_grad(sa, y), cb);
  auto pa = a.parameters();
  auto pb = b.parameters();
  for (std::size_t k = 0; k < pa.size(); ++k) EXPECT_LT(rel_error(pa[k].grad, pb[k].grad), 1e-12);
}

TEST(Model, ZeroUpstreamFrozenAndInferenceCache) {
  TkgmlpModel m = build_model(tiny_config(), 3);
  const Matrix x = random_matrix(10, 6, 4);
  ModelCache cache;
  forward(m, x, Mode::kTrain, 5, &cache);
  m.zero_grad();
  backward(m, Matrix(10, 1), cache);
  for (const ParamView& p : m.parameters()) {
    for (double g : p.grad) ASSERT_EQ(g, 0.0) << p.name;
  }
  m.kan[0].frozen = true;
  backward(m, Matrix(10, 1, 1.0), cache);
  for (double g : m.kan[0].spline_coeffs_grad) ASSERT_EQ(g, 0.0);
  double head = 0.0;
  for (double g : m.head.weight_grad.values()) head += std::abs(g);
  EXPECT_GT(head, 0.0);

  ModelCache inf;
  forward(m, x, Mode::kInference, 0, &inf);
  EXPECT_THROW(backward(m, Matrix(10, 1, 1.0), inf), ValidationError);
}

TEST(Model, PerLayerGradsMatchManualComposition) {
  ModelConfig c = tiny_config();
  c.dropout = 0.0;
  TkgmlpModel m = build_model(c, 9);
  const Matrix x = random_matrix(10, 6, 4);
  const Matrix up = random_matrix(10, 1, 5);
  ModelCache cache;
  forward(m, x, Mode::kTrain, 0, &cache);
  m.zero_grad();
  backward_from_logits(m, up, cache);

  // Manual chain through the module-level backwards.
  TkgmlpModel r = build_model(c, 9);
  r.zero_grad();
  BatchNormCache bnc;
  r.input_bn.mode = Mode::kTrain;
  Matrix h = batchnorm_apply(x, r.input_bn, &bnc);
  KanCache kc;
  h = kan_forward(h, r.kan[0], &kc);
  GmlpBlockCache gc;
  h = gmlp_block_forward(h, r.gmlp[0], Mode::kTrain, derive_seed(0, 1000), &gc);
  LinearCache hc;
  linear_forward(h, r.head, &hc);
  Matrix g = linear_backward(up, hc, r.head);
  g = gmlp_block_backward(g, gc, r.gmlp[0]);
  g = kan_backward(g, kc, r.kan[0]);
  batchnorm_backward(g, bnc, r.input_bn);
  auto pm = m.parameters();
  auto pr = r.parameters();
  for (std::size_t k = 0; k < pm.size(); ++k) {
    EXPECT_EQ(std::vector<double>(pm[k].grad.begin(), pm[k].grad.end()),
              std::vector<double>(pr[k].grad.begin(), pr[k].grad.end()))
        << pm[k].name;
  }
}

}  // namespace
}  // namespace tkgmlp
