#pragma once

#include <cstddef>
#include <cstdint>

#include "tkgmlp/matrix.h"

namespace tkgmlp {

enum class InitScheme {
  kXavierUniform,  // U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))
  kZeros,
  kOnes,
  kUniform,        // U(-scale, +scale)
};

// Deterministic parameter tensor of shape (rows x cols). For kXavierUniform
// fan_in = rows and fan_out = cols, which matches the (in x out) weight
// layout used by LinearParams.
Matrix init_params(std::size_t rows, std::size_t cols, InitScheme scheme,
                   std::uint64_t seed, double scale = 0.0);

double xavier_bound(std::size_t fan_in, std::size_t fan_out);

}  // namespace tkgmlp
