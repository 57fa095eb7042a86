#pragma once

#include <array>
#include <vector>

#include "spiro/geometry.hpp"

namespace spiro {

// The fixed Poisson bivector sin(theta) d_theta ^ d_phi on S^2.
struct PoissonBivector {
  static double coefficient(double theta);

  // pi(df, dg) = sin(theta) (df_theta dg_phi - df_phi dg_theta)
  static double contract(double theta, const HarmonicGradient& df,
                         const HarmonicGradient& dg);
};

// X_H for H = Y_l^m in the real basis.
struct HamiltonianField {
  HarmonicIndex idx;
};

// A tangent vector in the coordinate basis (d_theta, d_phi).
struct TangentSample {
  SphericalPoint point;
  double v_theta = 0.0;
  double v_phi = 0.0;
};

// Components of pi(dH, .) at p given the differential of H there. Linear in
// dH, so it also serves combinations of Hamiltonians.
TangentSample hamiltonian_vector(const SphericalPoint& p,
                                 const HarmonicGradient& dH);

// v_theta = -sin(theta) dH/dphi, v_phi = sin(theta) dH/dtheta.
TangentSample hamiltonian_components(const HamiltonianField& field,
                                     const SphericalPoint& p);

// Samples of X_H along the spiral, in spiral order.
std::vector<TangentSample> evaluate_on_spiral(const HamiltonianField& field,
                                              const SpiralCurve& curve);

// dH(X_H) at p. Zero up to round-off by antisymmetry of the bracket.
double energy_drift(const HamiltonianField& field, const SphericalPoint& p);

// Pushforward of a coordinate-basis tangent vector into R^3, for export.
std::array<double, 3> to_ambient(const TangentSample& v);

}  // namespace spiro
