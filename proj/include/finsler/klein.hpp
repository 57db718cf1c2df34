#pragma once

#include <cmath>
#include <stdexcept>

#include "finsler/jet.hpp"
#include "finsler/vec2.hpp"

namespace finsler {

// Point of the open Klein disk |p| < 1.
using DiskPoint = Vec2;
// Tangent vector in the flat chart.
using TangentVector = Vec2;

// Point of the circle of radius R (the boundary of the deformation disk D),
// stored as an angle reduced mod 2pi.
struct BoundaryAngle {
  double angle = 0.0;
  double radius = 0.5;

  BoundaryAngle() = default;
  BoundaryAngle(double angle_, double radius_) : angle(wrap_angle(angle_)), radius(radius_) {}

  Vec2 point() const { return {radius * std::cos(angle), radius * std::sin(angle)}; }
  Vec2 tangent() const { return {-std::sin(angle), std::cos(angle)}; }  // unit, ccw
};

struct MetricTensor2 {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;

  double det() const { return g11 * g22 - g12 * g12; }
  double quad(const Vec2& v, const Vec2& w) const {
    return g11 * v.x * w.x + g12 * (v.x * w.y + v.y * w.x) + g22 * v.y * w.y;
  }
};

inline void require_inside_disk(const DiskPoint& p) {
  if (norm2(p) >= 1.0)
    throw std::domain_error("point outside the open unit disk");
}

// Klein metric: <v,w>/(1-|p|^2) + <p,v><p,w>/(1-|p|^2)^2
inline double g0_eval(const DiskPoint& p, const TangentVector& v, const TangentVector& w) {
  require_inside_disk(p);
  const double d = 1.0 - norm2(p);
  return dot(v, w) / d + dot(p, v) * dot(p, w) / (d * d);
}

inline MetricTensor2 g0_tensor(const DiskPoint& p) {
  require_inside_disk(p);
  const double d = 1.0 - norm2(p);
  MetricTensor2 g;
  g.g11 = 1.0 / d + p.x * p.x / (d * d);
  g.g12 = p.x * p.y / (d * d);
  g.g22 = 1.0 / d + p.y * p.y / (d * d);
  return g;
}

// F0(p, v)
inline double klein_norm(const DiskPoint& p, const TangentVector& v) {
  return std::sqrt(g0_eval(p, v, v));
}

// Hyperbolic distance templated over the scalar so the nested-dual mixed
// derivative can run through the same expression.
template <class T>
T hyp_distance_t(const T& px, const T& py, const T& qx, const T& qy) {
  T num = 1.0 - (px * qx + py * qy);
  T den = sqrt((1.0 - (px * px + py * py)) * (1.0 - (qx * qx + qy * qy)));
  return acosh(num / den);
}

inline double hyp_distance(const DiskPoint& p, const DiskPoint& q) {
  require_inside_disk(p);
  require_inside_disk(q);
  const double arg = (1.0 - dot(p, q)) / std::sqrt((1.0 - norm2(p)) * (1.0 - norm2(q)));
  return std::acosh(std::max(arg, 1.0));
}

// restriction of the hyperbolic distance to the circle of radius R
inline double boundary_distance(const BoundaryAngle& x, const BoundaryAngle& y) {
  return hyp_distance(x.point(), y.point());
}

inline constexpr double kCoincidentAngleTol = 1e-6;

// d^2 f / dt ds at (x.angle, y.angle) with f(t, s) = d_g0(R e^{it}, R e^{is}),
// by nested forward-mode duals through the acosh formula.
inline double boundary_distance_mixed_derivative(const BoundaryAngle& x, const BoundaryAngle& y) {
  const double sep = std::abs(angle_diff(x.angle, y.angle));
  if (sep < kCoincidentAngleTol)
    throw std::domain_error("boundary points coincide within the angular threshold");
  const double R = x.radius;
  Jet2 t;  // seeds d/dt in the outer slot
  t.a = Jet<double>(x.angle, 0.0);
  t.b = Jet<double>(1.0, 0.0);
  Jet2 s;  // seeds d/ds in the inner slot
  s.a = Jet<double>(y.angle, 1.0);
  s.b = Jet<double>(0.0, 0.0);
  Jet2 px = R * cos(t), py = R * sin(t);
  Jet2 qx = R * cos(s), qy = R * sin(s);
  Jet2 dist = hyp_distance_t(px, py, qx, qy);
  return dist.b.b;
}

}  // namespace finsler
