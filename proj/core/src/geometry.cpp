#include "spiro/geometry.hpp"

#include <cmath>
#include <string>

#include "spiro/errors.hpp"

namespace spiro {

namespace {

// P_l^m(x) and P_{l-1}^m(x) together; the second is 0 when l == m.
struct LegendrePair {
  double p_l = 0.0;
  double p_lm1 = 0.0;
};

LegendrePair legendre_pair(int l, int m, double x) {
  // P_m^m = (-1)^m (2m-1)!! (1-x^2)^(m/2)
  const double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
  double pmm = 1.0;
  double odd = 1.0;
  for (int i = 1; i <= m; ++i) {
    pmm *= -odd * somx2;
    odd += 2.0;
  }
  if (l == m) return {pmm, 0.0};

  double prev = pmm;
  double cur = x * (2.0 * m + 1.0) * pmm;  // P_{m+1}^m
  for (int ll = m + 2; ll <= l; ++ll) {
    const double next =
        ((2.0 * ll - 1.0) * x * cur - (ll + m - 1.0) * prev) / (ll - m);
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

// sqrt((2l+1)/(4pi) * (l-m)!/(l+m)!) for m >= 0.
double normalization(int l, int m) {
  double ratio = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
}

void check_not_pole(const SphericalPoint& p) {
  if (p.theta() == 0.0 || p.theta() == kPi) {
    throw DomainError("harmonic gradient is undefined at the poles (theta=" +
                      std::to_string(p.theta()) + ")");
  }
}

}  // namespace

SphericalPoint::SphericalPoint(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw DomainError("spherical coordinates must be finite");
  }
  if (theta < 0.0 || theta > kPi) {
    throw DomainError("polar angle outside [0, pi]: " + std::to_string(theta));
  }
  double reduced = std::fmod(phi, kTwoPi);
  if (reduced < 0.0) reduced += kTwoPi;
  if (reduced >= kTwoPi) reduced = 0.0;
  theta_ = theta;
  phi_ = reduced;
}

std::array<double, 3> SphericalPoint::cartesian() const {
  const double s = std::sin(theta_);
  return {s * std::cos(phi_), s * std::sin(phi_), std::cos(theta_)};
}

void HarmonicIndex::validate() const {
  if (degree < 0 || order > degree || order < -degree) {
    throw DomainError("invalid harmonic index (l=" + std::to_string(degree) +
                      ", m=" + std::to_string(order) + ")");
  }
}

void SpiralCurve::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("spiral constant c must be positive");
  }
  if (num_points < 2) {
    throw ConfigError("spiral needs at least 2 points");
  }
  if (!(t_margin > 0.0) || !(t_margin < kPi / 2.0)) {
    throw ConfigError("t_margin must lie in (0, pi/2)");
  }
}

double legendre_pnm(int l, int m, double x) {
  if (m < 0 || m > l) {
    throw DomainError("legendre_pnm requires 0 <= m <= l (l=" +
                      std::to_string(l) + ", m=" + std::to_string(m) + ")");
  }
  if (!(x >= -1.0 && x <= 1.0)) {
    throw DomainError("legendre_pnm argument outside [-1, 1]");
  }
  return legendre_pair(l, m, x).p_l;
}

double real_spherical_harmonic(HarmonicIndex idx, SphericalPoint p) {
  idx.validate();
  const int l = idx.degree;
  const int am = idx.order < 0 ? -idx.order : idx.order;
  const double plm = legendre_pnm(l, am, std::cos(p.theta()));
  const double n = normalization(l, am);
  if (idx.order == 0) return n * plm;
  const double angle = am * p.phi();
  const double azimuthal =
      idx.order > 0 ? std::cos(angle) : std::sin(angle);
  return std::numbers::sqrt2 * n * plm * azimuthal;
}

HarmonicValue evaluate_harmonic(HarmonicIndex idx, SphericalPoint p) {
  idx.validate();
  check_not_pole(p);
  const int l = idx.degree;
  const int am = idx.order < 0 ? -idx.order : idx.order;
  const double x = std::cos(p.theta());
  const double s = std::sin(p.theta());
  const LegendrePair lp = legendre_pair(l, am, x);
  // (1-x^2) dP_l^m/dx = (l+m) P_{l-1}^m - l x P_l^m, and d/dtheta = -s d/dx.
  const double dp_dtheta = (l * x * lp.p_l - (l + am) * lp.p_lm1) / s;

  double scale = normalization(l, am);
  double az = 1.0;
  double daz = 0.0;
  if (idx.order != 0) {
    scale *= std::numbers::sqrt2;
    const double angle = am * p.phi();
    if (idx.order > 0) {
      az = std::cos(angle);
      daz = -am * std::sin(angle);
    } else {
      az = std::sin(angle);
      daz = am * std::cos(angle);
    }
  }
  HarmonicValue out;
  out.value = scale * lp.p_l * az;
  out.gradient.dtheta = scale * dp_dtheta * az;
  out.gradient.dphi = scale * lp.p_l * daz;
  return out;
}

HarmonicGradient harmonic_gradient(HarmonicIndex idx, SphericalPoint p) {
  return evaluate_harmonic(idx, p).gradient;
}

std::array<double, 3> spiral_point(const SpiralCurve& curve, double t) {
  if (!(t >= 0.0 && t <= kPi)) {
    throw DomainError("spiral parameter t outside [0, pi]");
  }
  const double s = std::sin(t);
  const double ct = curve.c * t;
  return {s * std::cos(ct), s * std::sin(ct), std::cos(t)};
}

SphericalPoint spiral_spherical_point(const SpiralCurve& curve, double t) {
  if (!(t >= 0.0 && t <= kPi)) {
    throw DomainError("spiral parameter t outside [0, pi]");
  }
  return SphericalPoint(t, curve.c * t);
}

std::vector<SphericalPoint> spiral_sample(const SpiralCurve& curve) {
  curve.validate();
  const double step =
      (kPi - 2.0 * curve.t_margin) / static_cast<double>(curve.num_points - 1);
  std::vector<SphericalPoint> points;
  points.reserve(static_cast<std::size_t>(curve.num_points));
  for (int i = 0; i < curve.num_points; ++i) {
    points.push_back(spiral_spherical_point(curve, curve.t_margin + i * step));
  }
  return points;
}

}  // namespace spiro
