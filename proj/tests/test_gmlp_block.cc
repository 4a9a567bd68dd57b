#include <cmath>

#include <gtest/gtest.h>

#include "support/oracles.h"
#include "tkgmlp/activations.h"
#include "tkgmlp/error.h"
#include "tkgmlp/gmlp_block.h"
#include "tkgmlp/init.h"
#include "tkgmlp/random.h"

namespace tkgmlp {
namespace {

using testing::numeric_grad;
using testing::rel_error;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  return init_params(r, c, InitScheme::kUniform, seed, scale);
}

double weighted_sum(const Matrix& y, const Matrix& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * w.values()[i];
  return s;
}

GmlpBlockParams identity_block(std::size_t d) {
  GmlpBlockParams p = gmlp_block_init(d, d, 0.0, 1);
  p.gate = linear_from(Matrix::Identity(d), std::vector<double>(d, 0.0));
  p.value = linear_from(Matrix::Identity(d), std::vector<double>(d, 0.0));
  return p;
}

TEST(Swiglu, ScalarCases) {
  GmlpBlockParams p = identity_block(1);
  EXPECT_EQ(swiglu(Matrix(1, 1, 0.0), p)(0, 0), 0.0);
  EXPECT_NEAR(swiglu(Matrix(1, 1, 1.0), p)(0, 0), 0.7310586, 1e-7);
  EXPECT_EQ(swiglu(Matrix(1, 1, 1.0), p)(0, 0), silu(1.0) * 1.0);
}

TEST(Swiglu, BranchesMultiply) {
  const GmlpBlockParams p = gmlp_block_init(5, 7, 0.0, 3);
  const Matrix x = random_matrix(4, 5, 2);
  const Matrix g = swiglu_gate(x, p);
  const Matrix v = swiglu_value(x, p);
  const Matrix y = swiglu(x, p);
  ASSERT_EQ(y.cols(), 7u);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y.values()[i], g.values()[i] * v.values()[i]);
}

TEST(Swiglu, GradientMatchesFiniteDifference) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GmlpBlockParams p = gmlp_block_init(3, 4, 0.0, seed);
    Rng rng(seed);
    for (double& b : p.gate.bias) b = uniform01(rng) - 0.5;
    for (double& b : p.value.bias) b = uniform01(rng) - 0.5;
    Matrix x = random_matrix(5, 3, seed + 1);
    const Matrix w = random_matrix(5, 4, seed + 2);
    const auto loss = [&] { return weighted_sum(swiglu(x, p), w); };
    SwigluCache cache;
    swiglu(x, p, &cache);
    p.zero_grad();
    const Matrix dx = swiglu_backward(w, cache, p);
    EXPECT_LT(rel_error(dx.values(), numeric_grad(loss, x.values())), 1e-5);
    EXPECT_LT(rel_error(p.gate.weight_grad.values(), numeric_grad(loss, p.gate.weight.values())), 1e-5);
    EXPECT_LT(rel_error(p.value.weight_grad.values(), numeric_grad(loss, p.value.weight.values())), 1e-5);
    EXPECT_LT(rel_error(p.gate.bias_grad, numeric_grad(loss, p.gate.bias)), 1e-5);
    EXPECT_LT(rel_error(p.value.bias_grad, numeric_grad(loss, p.value.bias)), 1e-5);
  }
}

TEST(GmlpBlock, InferenceIdentityComposition) {
  GmlpBlockParams p = identity_block(3);
  p.bn.running_var.assign(3, 1.0 - p.bn.epsilon);  // exact identity normalization
  const Matrix x = random_matrix(4, 3, 5);
  const Matrix y = gmlp_block_forward(x, p, Mode::kInference, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.values()[i];
    EXPECT_NEAR(y.values()[i], silu(v) * v, 1e-15);
  }
}

TEST(GmlpBlock, ConstantColumnTrainMode) {
  GmlpBlockParams p = gmlp_block_init(2, 3, 0.0, 4);
  for (double& b : p.gate.bias) b = 0.4;
  for (double& b : p.value.bias) b = -1.5;
  const Matrix x(6, 2, 3.25);
  const Matrix y = gmlp_block_forward(x, p, Mode::kTrain, 0);
  for (double v : y.values()) EXPECT_NEAR(v, silu(0.4) * -1.5, 1e-15);
}

TEST(GmlpBlock, OutputDimIsHidden) {
  GmlpBlockParams p = gmlp_block_init(9, 4, 0.3, 4);
  EXPECT_EQ(gmlp_block_forward(random_matrix(5, 9, 1), p, Mode::kTrain, 3).cols(), 4u);
  EXPECT_THROW(gmlp_block_forward(random_matrix(5, 8, 1), p, Mode::kTrain, 3), ShapeError);
  EXPECT_THROW(gmlp_block_init(3, 3, 1.0, 1), ValidationError);
}

TEST(GmlpBlock, MaskedPositionsGetNoGradient) {
  GmlpBlockParams p = gmlp_block_init(3, 6, 0.5, 4);
  const Matrix x = random_matrix(8, 3, 2);
  GmlpBlockCache cache;
  gmlp_block_forward(x, p, Mode::kTrain, 11, &cache);
  // Upstream nonzero only where the mask dropped: gradients vanish.
  Matrix up(8, 6);
  for (std::size_t i = 0; i < up.size(); ++i) up.values()[i] = cache.dropout_mask.values()[i] == 0.0 ? 1.0 : 0.0;
  p.zero_grad();
  const Matrix dx = gmlp_block_backward(up, cache, p);
  for (double g : dx.values()) EXPECT_EQ(g, 0.0);
  for (double g : p.gate.weight_grad.values()) EXPECT_EQ(g, 0.0);
  for (double g : p.bn.gamma_grad) EXPECT_EQ(g, 0.0);
}

TEST(GmlpBlock, GradientMatchesFiniteDifferenceWithFixedMask) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GmlpBlockParams p = gmlp_block_init(4, 5, 0.3, seed);
    Rng rng(seed);
    for (double& g : p.bn.gamma) g = 0.5 + uniform01(rng);
    for (double& b : p.bn.beta) b = uniform01(rng) - 0.5;
    Matrix x = random_matrix(7, 4, seed + 3, 2.0);
    const Matrix w = random_matrix(7, 5, seed + 4);
    const std::uint64_t mask_seed = 1234 + seed;
    const auto loss = [&] {
      GmlpBlockParams copy = p;
      return weighted_sum(gmlp_block_forward(x, copy, Mode::kTrain, mask_seed), w);
    };
    GmlpBlockCache cache;
    GmlpBlockParams run = p;
    gmlp_block_forward(x, run, Mode::kTrain, mask_seed, &cache);
    run.zero_grad();
    const Matrix dx = gmlp_block_backward(w, cache, run);
    EXPECT_LT(rel_error(dx.values(), numeric_grad(loss, x.values())), 1e-4);
    EXPECT_LT(rel_error(run.bn.gamma_grad, numeric_grad(loss, p.bn.gamma)), 1e-4);
    EXPECT_LT(rel_error(run.bn.beta_grad, numeric_grad(loss, p.bn.beta)), 1e-4);
    EXPECT_LT(rel_error(run.gate.weight_grad.values(), numeric_grad(loss, p.gate.weight.values())), 1e-4);
    EXPECT_LT(rel_error(run.value.weight_grad.values(), numeric_grad(loss, p.value.weight.values())), 1e-4);
    EXPECT_LT(rel_error(run.gate.bias_grad, numeric_grad(loss, p.gate.bias)), 1e-4);
    EXPECT_LT(rel_error(run.value.bias_grad, numeric_grad(loss, p.value.bias)), 1e-4);
  }
}

}  // namespace
}  // namespace tkgmlp
