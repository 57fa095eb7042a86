#include "spiro/optimizer.hpp"

#include <cmath>
#include <string>

#include "spiro/errors.hpp"

namespace spiro {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
}

OptimizerState OptimizerState::for_params(const ModelParams& params) {
  OptimizerState s;
  for (const auto* t : params.tensors()) {
    s.first_moment.push_back(Matrix::Zero(t->value.rows(), t->value.cols()));
    s.second_moment.push_back(Matrix::Zero(t->value.rows(), t->value.cols()));
  }
  return s;
}

void optimizer_step(ModelParams& params, OptimizerState& state,
                    const AdamConfig& config) {
  const auto tensors = params.tensors();
  if (state.first_moment.size() != tensors.size() ||
      state.second_moment.size() != tensors.size()) {
    throw ConfigError("optimizer state does not match the parameter set");
  }
  for (const auto* t : tensors) {
    if (!t->grad.allFinite()) {
      throw NumericalError("non-finite gradient in tensor '" + t->name + "'");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double lr = config.learning_rate;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Parameter& p = *tensors[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = config.beta1 * m + (1.0 - config.beta1) * p.grad;
    v = config.beta2 * v + (1.0 - config.beta2) * p.grad.cwiseProduct(p.grad);
    if (config.weight_decay > 0.0 && p.value.rows() > 1 && p.value.cols() > 1) {
      p.value *= 1.0 - lr * config.weight_decay;
    }
    p.value.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
  }
}

}  // namespace spiro
