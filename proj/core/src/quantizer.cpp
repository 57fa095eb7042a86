#include "spiro/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spiro/errors.hpp"

namespace spiro {

Quantizer::Quantizer(int bins_per_component, double v_max)
    : bins_(bins_per_component), v_max_(v_max) {
  if (bins_ < 1 || bins_ > 256) {
    throw ConfigError("bins per component must be in [1, 256]");
  }
  if (!(v_max_ > 0.0) || !std::isfinite(v_max_)) {
    throw ConfigError("v_max must be positive and finite");
  }
}

int Quantizer::bin_of(double v) const {
  if (std::isnan(v)) throw DomainError("cannot quantize NaN");
  const double clamped = std::clamp(v, -v_max_, v_max_);
  const int b = static_cast<int>(std::floor((clamped + v_max_) / bin_width()));
  return std::clamp(b, 0, bins_ - 1);
}

double Quantizer::bin_center(int b) const {
  return -v_max_ + (b + 0.5) * bin_width();
}

int Quantizer::encode(double v_theta, double v_phi) const {
  return bin_of(v_theta) * bins_ + bin_of(v_phi);
}

std::array<double, 2> Quantizer::decode(int token) const {
  if (token < 0 || token >= vocab_size()) {
    throw std::out_of_range("token id " + std::to_string(token) +
                            " outside vocabulary of size " +
                            std::to_string(vocab_size()));
  }
  return {bin_center(token / bins_), bin_center(token % bins_)};
}

}  // namespace spiro
