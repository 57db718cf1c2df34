#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "finsler/curves.hpp"
#include "finsler/fourier.hpp"
#include "finsler/klein.hpp"

namespace finsler {

struct ToleranceConfig {
  double newton_tol = 1e-12;
  double quad_rel_tol = 1e-10;
  double fd_step = 1e-4;
  double ode_tol = 1e-12;
};

// Everything F_lambda(p, .) needs, reduced to two smooth periodic functions
// of the boundary angle beta:
//   m(beta) = d^2 d_g0 / dt ds at (x(beta), sigma(x(beta), p))   (angle units)
//   h(beta) = gradient in p of the angle of sigma(x(beta), p)
// so that F(p, v) = (1/4) * int m(beta) |<h(beta), v>| dbeta. The angle-based
// combination is the parametrization-invariant reading of the boundary
// integral; it reproduces F_0 at lambda = 0.
struct BoundaryData {
  Vec2 p;
  FourierSeries m, hx, hy;
  std::vector<double> m_raw, hx_raw, hy_raw;  // samples, used for kink bracketing

  Vec2 h(double beta) const { return {hx.eval(beta), hy.eval(beta)}; }
  Vec2 h_deriv(double beta) const { return {hx.deriv(beta), hy.deriv(beta)}; }
};

struct HessianReport {
  DiskPoint point;
  TangentVector direction;
  double eigen_min = 0.0;
  double eigen_max = 0.0;
  Mat2 hessian;  // of F^2 in v
};

struct ConjugateScanReport {
  bool sign_change = false;
  double first_change_t = -1.0;
  double min_abs_det = 0.0;
  double max_energy_drift = 0.0;
  int checkpoints = 0;
};

// radial tabulation of boundary data; valid by rotation invariance of the
// construction, used to accelerate flows that need many nearby evaluations
class RadialTable;

class FinslerHandle {
 public:
  FinslerHandle(std::shared_ptr<const CurveFamily> family, int quad_nodes = 256,
                double R0 = -1.0, ToleranceConfig tol = {}, int bd_samples = 192);
  ~FinslerHandle();

  const CurveFamily& family() const { return *family_; }
  double R() const { return family_->R(); }
  double R0() const { return R0_; }
  double lambda() const { return family_->metric().lambda(); }
  const ToleranceConfig& tolerances() const { return tol_; }
  int quad_nodes() const { return quad_nodes_; }

  bool fall_through(const DiskPoint& p) const { return norm(p) >= R0_; }

  // the metric: boundary integral inside D(R0), F0 outside
  double finsler_eval(const DiskPoint& p, const TangentVector& v) const;

  BoundaryData boundary_data(const DiskPoint& p) const;
  double eval_with_data(const BoundaryData& bd, const TangentVector& v) const;
  Vec2 grad_v_with_data(const BoundaryData& bd, const TangentVector& v) const;
  HessianReport hessian_with_data(const BoundaryData& bd, const TangentVector& v) const;

  HessianReport v_hessian(const DiskPoint& p, const TangentVector& v) const;

  // dual norm F*(p, phi) by golden-section over the direction angle;
  // angle_hint warm-starts the bracket
  double dual_norm(const DiskPoint& p, const TangentVector& covector,
                   double* angle_hint = nullptr) const;
  double dual_norm_with_data(const BoundaryData& bd, const TangentVector& covector,
                             double* angle_hint = nullptr) const;

  // length of a parametrized curve, adaptive in the parameter
  double finsler_length(const std::function<GeodesicState(double)>& curve, double a,
                        double b) const;
  // length of a sampled polyline (parameter values + positions)
  double finsler_length(const std::vector<double>& params, const std::vector<Vec2>& points) const;

  // distance through the family chord (Arcostanzo geodesics)
  double finsler_distance(const DiskPoint& p, const DiskPoint& q) const;

  // Euler-Lagrange flow of F^2/2 with a finite-difference Jacobi pair;
  // reports determinant sign changes of the horizontal response
  ConjugateScanReport conjugate_scan(const DiskPoint& p, const TangentVector& v, double horizon,
                                     int steps) const;

  // Radial tabulation of boundary data (valid by rotation equivariance of
  // the construction). With table mode on, point queries interpolate the
  // table instead of running the direct solve; conjugate_scan always builds
  // and uses it.
  void build_radial_table(int n_radii = 64) const;
  bool has_radial_table() const;
  void set_table_mode(bool on) const { table_mode_ = on; }
  bool table_mode() const { return table_mode_; }
  double eval_table(const DiskPoint& p, const TangentVector& v) const;
  BoundaryData boundary_data_table(const DiskPoint& p) const;

 private:
  struct ArcSplit {
    double beta1, beta2;  // kink angles, beta1 < beta2 < beta1 + 2pi
  };
  ArcSplit find_kinks(const BoundaryData& bd, const TangentVector& v) const;
  double arc_integral(const BoundaryData& bd, const TangentVector& v, double b1,
                      double b2) const;
  Vec2 arc_integral_vec(const BoundaryData& bd, double b1, double b2, double sign) const;
  void el_acceleration(const DiskPoint& q, const TangentVector& v, Vec2& acc) const;

  std::shared_ptr<const CurveFamily> family_;
  int quad_nodes_;
  double R0_;
  ToleranceConfig tol_;
  int bd_samples_;
  mutable std::unique_ptr<RadialTable> table_;
  mutable bool table_mode_ = false;
};

}  // namespace finsler
