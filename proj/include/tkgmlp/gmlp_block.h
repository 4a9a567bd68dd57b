#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tkgmlp/batch_norm.h"
#include "tkgmlp/common.h"
#include "tkgmlp/dropout.h"
#include "tkgmlp/linear.h"
#include "tkgmlp/matrix.h"

namespace tkgmlp {

// BatchNorm -> SwiGLU -> Dropout. The gate branch (V, b1) goes through SiLU,
// the value branch (U, b2) stays linear, and the two are multiplied
// entrywise. No residual connection.
struct GmlpBlockParams {
  BatchNormState bn;
  LinearParams gate;   // V, b1
  LinearParams value;  // U, b2
  double dropout_rate = 0.0;
  bool frozen = false;

  std::size_t in_dim() const { return gate.in_dim(); }
  std::size_t out_dim() const { return gate.out_dim(); }
  std::size_t parameter_count() const;

  void set_frozen(bool f);
  void zero_grad();
  void append_params(const std::string& prefix, std::vector<ParamView>& out);
};

GmlpBlockParams gmlp_block_init(std::size_t in_dim, std::size_t hidden_dim,
                                double dropout_rate, std::uint64_t seed);

struct SwigluCache {
  LinearCache input;     // shared by both branches
  Matrix gate_pre;       // xV + b1
  Matrix value_out;      // xU + b2
};

Matrix swiglu_gate(const Matrix& x, const GmlpBlockParams& p);   // silu(xV + b1)
Matrix swiglu_value(const Matrix& x, const GmlpBlockParams& p);  // xU + b2
Matrix swiglu(const Matrix& x, const GmlpBlockParams& p,
              SwigluCache* cache = nullptr);
Matrix swiglu_backward(const Matrix& upstream, const SwigluCache& cache,
                       GmlpBlockParams& p);

struct GmlpBlockCache {
  Mode mode = Mode::kTrain;
  BatchNormCache bn;
  SwigluCache swiglu;
  Matrix dropout_mask;
};

// `mode` is applied to both the batch norm and the dropout. The dropout mask
// is drawn from `dropout_seed`.
Matrix gmlp_block_forward(const Matrix& x, GmlpBlockParams& p, Mode mode,
                          std::uint64_t dropout_seed,
                          GmlpBlockCache* cache = nullptr);
Matrix gmlp_block_backward(const Matrix& upstream, const GmlpBlockCache& cache,
                           GmlpBlockParams& p);

}  // namespace tkgmlp
