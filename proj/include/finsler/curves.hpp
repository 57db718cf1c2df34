#pragma once

#include <optional>

#include "finsler/geodesic.hpp"
#include "finsler/klein.hpp"
#include "finsler/rng.hpp"

namespace finsler {

// chart (x, y, t) of the curve family
struct ChordChart {
  BoundaryAngle x;
  BoundaryAngle y;
  double t = 0.0;
};

struct EndpointSolve {
  BoundaryAngle y;
  double t = 0.0;
  double residual = 0.0;
  int newton_iterations = 0;
};

struct DirectedCurveSolve {
  ChordChart chart;
  BoundaryAngle e_minus;
  BoundaryAngle e_plus;
};

struct ChordSolve {
  BoundaryAngle x;
  BoundaryAngle y;
  double t0 = 0.0;
  double t1 = 0.0;
};

struct InjectivityReport {
  int samples = 0;
  int pairs_checked = 0;
  double min_separation_ratio = 0.0;  // image distance / chart distance
  double ratio_floor = 0.0;
  bool pass = false;
};

// full data of a converged sigma solve
struct SigmaSolution {
  double beta_y = 0.0;     // angle of sigma(x, p)
  double t = 0.0;
  Vec2 velocity;           // d phi / dt at the solution
  Vec2 dphi_dbeta;         // d phi / d beta_y at the solution
  Vec2 grad_angle;         // gradient of beta_y with respect to p
  Vec2 grad_t;             // gradient of t with respect to p
  double residual = 0.0;
  int iterations = 0;
  bool closed_form = false;  // the chord through (x, y) misses supp f
};

// warm-start data threaded through consecutive solves
struct SigmaScratch {
  bool valid = false;
  double beta_y = 0.0;
  double t = 0.0;
  bool shoot_valid = false;
  TangentVector shoot;
};

// The family of interpolated curves phi_x^lambda(y, t) for x, y on the circle
// of radius R, with the end-point map sigma and its inverse solvers.
class CurveFamily {
 public:
  CurveFamily(const ConformalMetric& cm, double newton_tol = 1e-12);

  const ConformalMetric& metric() const { return *cm_; }
  const GeodesicEngine& engine() const { return engine_; }
  double R() const { return cm_->R(); }

  // barycenter of the g0- and g_lambda-geodesics through (x, y)
  Vec2 phi(const BoundaryAngle& x, const BoundaryAngle& y, double t) const;
  TangentVector phi_velocity(const BoundaryAngle& x, const BoundaryAngle& y, double t) const;
  GeodesicState phi_state(const Vec2& x, const Vec2& y, double t,
                          const TangentVector* shoot_seed = nullptr,
                          TangentVector* shoot_out = nullptr) const;

  EndpointSolve sigma(const BoundaryAngle& x, const DiskPoint& p) const;
  SigmaSolution sigma_full(const BoundaryAngle& x, const DiskPoint& p,
                           SigmaScratch* scratch = nullptr) const;

  // derivative of the embedded boundary point sigma(x, p) with respect to p
  Mat2 sigma_jacobian(const BoundaryAngle& x, const DiskPoint& p) const;

  ChordSolve solve_chord(const DiskPoint& p, const DiskPoint& q) const;
  DirectedCurveSolve solve_direction(const DiskPoint& p, const TangentVector& v) const;

  InjectivityReport injectivity_probe(int samples, std::uint64_t seed,
                                      double ratio_floor = 1e-4) const;

  double newton_tol() const { return newton_tol_; }

 private:
  SigmaSolution sigma_newton(const BoundaryAngle& x, const DiskPoint& p, double beta0, double t0,
                             SigmaScratch* scratch) const;
  void seed_from_chord(const Vec2& x, const DiskPoint& p, double& beta, double& t) const;

  const ConformalMetric* cm_;
  GeodesicEngine engine_;
  double newton_tol_;
};

}  // namespace finsler
