#pragma once

#include <cstdint>
#include <vector>

#include "spiro/model.hpp"

namespace spiro {

// Adaptive-moment optimizer with bias correction and decoupled weight decay.
struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // applied to matrices only, not gains/biases

  void validate() const;
};

struct OptimizerState {
  std::int64_t step = 0;
  std::vector<Matrix> first_moment;   // one per tensor, canonical order
  std::vector<Matrix> second_moment;

  static OptimizerState for_params(const ModelParams& params);
};

// Applies one update from the gradients currently in params. Throws
// NumericalError naming the tensor if any gradient is NaN/Inf; in that case
// no parameter is modified.
void optimizer_step(ModelParams& params, OptimizerState& state,
                    const AdamConfig& config);

}  // namespace spiro
