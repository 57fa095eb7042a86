#include "spiro/fields.hpp"

#include <cmath>

namespace spiro {

double PoissonBivector::coefficient(double theta) { return std::sin(theta); }

double PoissonBivector::contract(double theta, const HarmonicGradient& df,
                                 const HarmonicGradient& dg) {
  return coefficient(theta) * (df.dtheta * dg.dphi - df.dphi * dg.dtheta);
}

TangentSample hamiltonian_vector(const SphericalPoint& p,
                                 const HarmonicGradient& dH) {
  // X_H(f) = pi(dH, df); reading off the coefficients of df_theta and df_phi.
  const double s = PoissonBivector::coefficient(p.theta());
  TangentSample out;
  out.point = p;
  out.v_theta = -s * dH.dphi;
  out.v_phi = s * dH.dtheta;
  return out;
}

TangentSample hamiltonian_components(const HamiltonianField& field,
                                     const SphericalPoint& p) {
  return hamiltonian_vector(p, harmonic_gradient(field.idx, p));
}

std::vector<TangentSample> evaluate_on_spiral(const HamiltonianField& field,
                                              const SpiralCurve& curve) {
  field.idx.validate();
  const auto points = spiral_sample(curve);
  std::vector<TangentSample> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(hamiltonian_components(field, p));
  return out;
}

double energy_drift(const HamiltonianField& field, const SphericalPoint& p) {
  const HarmonicGradient dH = harmonic_gradient(field.idx, p);
  const TangentSample x = hamiltonian_vector(p, dH);
  return x.v_theta * dH.dtheta + x.v_phi * dH.dphi;
}

std::array<double, 3> to_ambient(const TangentSample& v) {
  const double st = std::sin(v.point.theta());
  const double ct = std::cos(v.point.theta());
  const double sp = std::sin(v.point.phi());
  const double cp = std::cos(v.point.phi());
  // d_theta = (ct cp, ct sp, -st), d_phi = (-st sp, st cp, 0)
  return {v.v_theta * ct * cp - v.v_phi * st * sp,
          v.v_theta * ct * sp + v.v_phi * st * cp, -v.v_theta * st};
}

}  // namespace spiro
