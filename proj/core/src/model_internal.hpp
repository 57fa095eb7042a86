#pragma once

#include <cmath>
#include <numbers>

#include "spiro/model.hpp"

namespace spiro::detail {

inline constexpr double kLayerNormEps = 1e-5;
// sqrt(2/pi), tanh-form GELU
inline const double kGeluC = std::sqrt(2.0 / std::numbers::pi);

Matrix layer_norm(const Matrix& x, const Parameter& gain, const Parameter& bias,
                  LayerNormCache& cache);
Matrix gelu(const Matrix& z);
Matrix gelu_grad(const Matrix& z);

}  // namespace spiro::detail
