#pragma once

#include <array>

namespace spiro {

// Per-component uniform binning of a 2-component tangent sample. Token id
// is b_theta * bins + b_phi. Bins are half-open [lo, hi) except the top
// one, which also takes +v_max.
class Quantizer {
 public:
  Quantizer(int bins_per_component, double v_max);

  int bins() const { return bins_; }
  double v_max() const { return v_max_; }
  int vocab_size() const { return bins_ * bins_; }
  double bin_width() const { return 2.0 * v_max_ / bins_; }

  int bin_of(double v) const;
  double bin_center(int b) const;

  int encode(double v_theta, double v_phi) const;
  // Throws std::out_of_range for ids outside [0, bins^2).
  std::array<double, 2> decode(int token) const;

 private:
  int bins_;
  double v_max_;
};

}  // namespace spiro
