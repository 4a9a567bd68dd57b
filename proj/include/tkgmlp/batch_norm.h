#pragma once

#include <string>
#include <vector>

#include "tkgmlp/common.h"
#include "tkgmlp/matrix.h"

namespace tkgmlp {

// Per-column batch normalization. Training mode standardizes with the batch
// mean and biased variance and folds the batch moments into the running
// statistics (unbiased variance, exponential moving average with `momentum`);
// inference mode uses the running statistics.
struct BatchNormState {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  std::vector<double> gamma_grad;
  std::vector<double> beta_grad;
  double momentum = 0.1;
  double epsilon = 1e-5;
  Mode mode = Mode::kTrain;
  bool frozen = false;

  std::size_t dim() const { return gamma.size(); }
  void zero_grad();
  void append_params(const std::string& prefix, std::vector<ParamView>& out);
};

// gamma = 1, beta = 0, running mean 0, running var 1.
BatchNormState batchnorm_init(std::size_t dim, double momentum = 0.1,
                              double epsilon = 1e-5);

struct BatchNormCache {
  Mode mode = Mode::kTrain;
  Matrix normalized;            // x-hat
  std::vector<double> inv_std;  // 1/sqrt(var + eps), per column
};

// Uses s.mode. Throws DegenerateError for a single-row batch in train mode.
Matrix batchnorm_apply(const Matrix& x, BatchNormState& s,
                       BatchNormCache* cache = nullptr);

Matrix batchnorm_backward(const Matrix& upstream, const BatchNormCache& cache,
                          BatchNormState& s);

}  // namespace tkgmlp
