#pragma once

#include <cmath>

#include "finsler/jet.hpp"

namespace finsler {

namespace detail {
template <class T> double value_of(const T& x) { return x; }
template <class T> double value_of(const Jet<T>& x) { return value_of(x.a); }
}  // namespace detail

// C-infinity transition built from exp(-1/t): 0 for x <= 0, 1 for x >= 1.
template <class T>
T mollifier_step(const T& x) {
  const double xv = detail::value_of(x);
  if (xv <= 0.0) return T(0.0);
  if (xv >= 1.0) return T(1.0);
  T ha = exp(-1.0 / x);
  T hb = exp(-1.0 / (1.0 - x));
  return ha / (ha + hb);
}

inline double smoothstep(double x) { return mollifier_step(x); }

inline double smoothstep_d1(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  Jet<double> j(x, 1.0);
  return mollifier_step(j).b;
}

inline double smoothstep_d2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  Jet2 j;
  j.a = Jet<double>(x, 1.0);
  j.b = Jet<double>(1.0, 0.0);
  return mollifier_step(j).b.b;
}

inline double smoothstep_d3(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  using Jet3 = Jet<Jet<Jet<double>>>;
  Jet3 j;
  j.a.a = Jet<double>(x, 1.0);
  j.a.b = Jet<double>(1.0, 0.0);
  j.b.a = Jet<double>(1.0, 0.0);
  return mollifier_step(j).b.b.b;
}

// Radial bump: 1 on [0, inner], 0 on [outer, inf), C-infinity in between.
struct BumpProfile {
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  BumpProfile() = default;
  BumpProfile(double inner, double outer) : inner_radius(inner), outer_radius(outer) {}

  double width() const { return outer_radius - inner_radius; }

  double value(double r) const { return smoothstep((outer_radius - r) / width()); }
  double d1(double r) const { return -smoothstep_d1((outer_radius - r) / width()) / width(); }
  double d2(double r) const { return smoothstep_d2((outer_radius - r) / width()) / (width() * width()); }
  double d3(double r) const {
    const double w = width();
    return -smoothstep_d3((outer_radius - r) / w) / (w * w * w);
  }
};

// Interpolation weight of the curve family: 1 on [1/3, 2/3], 0 outside
// (1/4, 3/4), rho(t) = rho(1 - t) exactly. The double reflection makes the
// symmetry hold bit-for-bit: both t and fl(1-t) canonicalize to the same
// double before the ramp is evaluated.
inline double rho_canonical(double t) {
  const double u = 1.0 - t;
  return t > u ? u : 1.0 - u;
}

inline double rho(double t) {
  return smoothstep((rho_canonical(t) - 0.25) * 12.0);
}

inline double rho_d1(double t) {
  const double sign = t > 1.0 - t ? -1.0 : 1.0;
  return sign * 12.0 * smoothstep_d1((rho_canonical(t) - 0.25) * 12.0);
}

}  // namespace finsler
