#pragma once

#include <array>
#include <numbers>
#include <vector>

namespace spiro {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// A point on the unit sphere. theta is the polar angle in [0, pi], phi the
// azimuth, always stored reduced into [0, 2pi).
class SphericalPoint {
 public:
  SphericalPoint() = default;
  // Throws DomainError if theta is outside [0, pi] or either angle is not
  // finite. phi is reduced modulo 2pi.
  SphericalPoint(double theta, double phi);

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  std::array<double, 3> cartesian() const;

  friend bool operator==(const SphericalPoint&, const SphericalPoint&) = default;

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

struct HarmonicIndex {
  int degree = 0;  // l
  int order = 0;   // m, |m| <= l

  // Throws DomainError when l < 0 or |m| > l.
  void validate() const;

  friend bool operator==(const HarmonicIndex&, const HarmonicIndex&) = default;
};

struct HarmonicGradient {
  double dtheta = 0.0;
  double dphi = 0.0;
};

struct SpiralCurve {
  double c = 32.0;          // turn density: phi = c * t
  int num_points = 100;
  double t_margin = 1e-2;   // inset from both poles, radians

  // Throws ConfigError unless c > 0, num_points >= 2, 0 < t_margin < pi/2.
  void validate() const;
};

// Associated Legendre function P_l^m(x) with the Condon-Shortley phase,
// via the upward recurrence in l from the closed form of P_m^m.
double legendre_pnm(int l, int m, double x);

// Real orthonormal spherical harmonic. For m > 0 the cos(m phi) branch,
// for m < 0 the sin(|m| phi) branch, both scaled by sqrt(2).
double real_spherical_harmonic(HarmonicIndex idx, SphericalPoint p);

// Analytic (dY/dtheta, dY/dphi). The theta derivative divides by sin(theta),
// so exact poles are rejected with DomainError.
HarmonicGradient harmonic_gradient(HarmonicIndex idx, SphericalPoint p);

// Value and gradient in one pass; shares the Legendre evaluation.
struct HarmonicValue {
  double value = 0.0;
  HarmonicGradient gradient;
};
HarmonicValue evaluate_harmonic(HarmonicIndex idx, SphericalPoint p);

// Point on the spiral x = sin t cos ct, y = sin t sin ct, z = cos t.
std::array<double, 3> spiral_point(const SpiralCurve& curve, double t);
SphericalPoint spiral_spherical_point(const SpiralCurve& curve, double t);

// num_points samples uniform in t over [t_margin, pi - t_margin], in
// increasing t. The list order is the token order.
std::vector<SphericalPoint> spiral_sample(const SpiralCurve& curve);

}  // namespace spiro
