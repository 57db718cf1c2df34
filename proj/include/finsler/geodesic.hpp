#pragma once

#include "finsler/conformal.hpp"
#include "finsler/klein.hpp"
#include "finsler/ode.hpp"

namespace finsler {

struct GeodesicState {
  DiskPoint position;
  TangentVector velocity;
};

struct ShootingResult {
  TangentVector initial_velocity;
  double residual = 0.0;
  int iterations = 0;
};

struct Christoffels {
  double g[2][2][2];  // g[k][i][j], symmetric in (i, j)
};

// Levi-Civita symbols of g_lambda: Klein closed form plus the conformal
// correction with u = lambda^2 f.
Christoffels christoffels(const ConformalMetric& cm, const DiskPoint& p);

// Closed-form g0-geodesic through x at t=0 and y at t=1 (image is the chord).
GeodesicState klein_chord_state(const DiskPoint& x, const DiskPoint& y, double t);
inline DiskPoint klein_chord_point(const DiskPoint& x, const DiskPoint& y, double t) {
  return klein_chord_state(x, y, t).position;
}

// distance from the origin to the segment [x, y]
double segment_origin_distance(const DiskPoint& x, const DiskPoint& y);

// state of G_x^lambda(y, .) at the waypoint t together with the exact flow
// Jacobians with respect to the shooting velocity (variational equations)
struct GPointVariation {
  Vec2 pos_t, vel_t;   // state at the waypoint
  Vec2 pos_1;          // position at t = 1
  Mat2 dpos_dw_t;      // d position(t) / d w
  Mat2 dvel_dw_t;      // d velocity(t) / d w
  Mat2 dpos_dw_1;      // d position(1) / d w
  TangentVector shoot;
  bool chord = false;  // curve is the straight chord (variation not needed)
};

struct GeodesicEngine {
  const ConformalMetric* cm;
  OdeOptions ode;
  double shoot_tol = 1e-11;  // plus one polishing iteration past it
  int max_newton = 50;
  double horizon = 4.0;

  explicit GeodesicEngine(const ConformalMetric& metric) : cm(&metric) {}

  // true when the g_lambda-geodesic between x and y is the straight chord
  // (lambda = 0, or the chord misses the support of f)
  bool chord_exact(const DiskPoint& x, const DiskPoint& y) const;

  GeodesicState exp_map(const DiskPoint& x, const TangentVector& v, double t) const;

  // geodesic flow augmented with the variational equations; integrates to
  // t_end recording position/Jacobian at the waypoint
  void flow_with_variation(const DiskPoint& x, const TangentVector& w, double t_waypoint,
                           double t_end, GPointVariation& out) const;

  // v with exp_map(x, v, 1).position = y, Newton shooting with the exact
  // variational Jacobian, seeded from the chord velocity
  ShootingResult connect(const DiskPoint& x, const DiskPoint& y,
                         const TangentVector* seed = nullptr) const;

  // G_x^lambda(y, t); reuses a previously solved shooting velocity when given
  GeodesicState g_point_state(const DiskPoint& x, const DiskPoint& y, double t,
                              const TangentVector* shoot_seed = nullptr,
                              TangentVector* shoot_out = nullptr) const;
  DiskPoint g_point(const DiskPoint& x, const DiskPoint& y, double t) const {
    return g_point_state(x, y, t).position;
  }

  // connect + one augmented pass: everything the end-point solvers need
  GPointVariation g_point_variation(const DiskPoint& x, const DiskPoint& y, double t,
                                    const TangentVector* shoot_seed = nullptr) const;
};

// Christoffel symbols and their position derivatives, for the variational flow
void christoffels_with_derivatives(const ConformalMetric& cm, const DiskPoint& p,
                                   Christoffels& G, double dG[2][2][2][2]);

}  // namespace finsler
