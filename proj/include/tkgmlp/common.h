#pragma once

#include <span>
#include <string>
#include <vector>

namespace tkgmlp {

enum class Mode { kTrain, kInference };

// Mutable view of one parameter tensor and its gradient buffer, flattened.
// The optimizer and the checkpoint writer walk a model through these.
struct ParamView {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
  bool frozen = false;
  std::vector<std::size_t> shape;
};

}  // namespace tkgmlp
