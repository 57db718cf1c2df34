#pragma once

#include <memory>
#include <vector>

#include "finsler/eigenfunction.hpp"
#include "finsler/klein.hpp"
#include "finsler/smoothstep.hpp"

namespace finsler {

// The deformed metric g_lambda = e^{2 lambda^2 f} g_0 with f = psi * theta,
// psi the first Dirichlet eigenfunction on D(R) and theta a radial cutoff
// with plateau edges at R/4 and R/2. All evaluations are pure; the object is
// immutable after construction.
class ConformalMetric {
 public:
  ConformalMetric(double lambda, double R, std::shared_ptr<const RadialEigenfunction> eigen);

  double lambda() const { return lambda_; }
  double R() const { return R_; }
  double delta0() const { return delta0_; }
  const RadialEigenfunction& eigenfunction() const { return *eigen_; }
  const BumpProfile& cutoff() const { return cutoff_; }

  // f(p) = psi(arctanh|p|) theta(|p|), 0 for |p| >= R/2
  double f_eval(const DiskPoint& p) const;

  // Euclidean chart gradient of f
  TangentVector f_grad(const DiskPoint& p) const;

  // positive hyperbolic Laplacian (-div grad) f; equals a*f on D(R/4)
  double laplacian_f(const DiskPoint& p) const;

  // conformal factor alpha_lambda = exp(2 lambda^2 f) >= 1
  double alpha(const DiskPoint& p) const;

  MetricTensor2 g_lambda_tensor(const DiskPoint& p) const;

  // closed-form Gaussian curvature of g_lambda; -1 wherever f and its
  // Laplacian vanish
  double gaussian_curvature(const DiskPoint& p) const;

  // exponent u = lambda^2 f and its gradient, for the Levi-Civita correction
  void conformal_exponent(const DiskPoint& p, double& u, TangentVector& du) const;

  // fast tabulated radial profile of f: F(s), F'(s), F''(s) with s = |p|
  void radial_profile(double s, double& f, double& d1, double& d2) const;

  // gradient and Hessian of u = lambda^2 f in the flat chart
  void conformal_derivatives(const DiskPoint& p, TangentVector& du, double hess[2][2]) const;

  bool is_flat_deformation() const { return lambda_ == 0.0; }

 private:
  struct RadialDerivs {
    double f, dfdr, ddfdr;  // in the geodesic radius r
  };
  RadialDerivs radial(double geodesic_r) const;
  double radial_profile_d1(double s) const;  // d/ds of f(s), s = |p|
  void build_profile_table();

  double lambda_;
  double R_;
  std::shared_ptr<const RadialEigenfunction> eigen_;
  BumpProfile cutoff_;
  double delta0_;
  // Hermite tables of (F, F'), (F', F''), (F'', F''') over s in [0, R/2]
  int table_n_ = 0;
  double table_h_ = 0.0;
  std::vector<double> tf_, tf1_, tf2_, tf3_;
};

// delta0 = 1/sqrt(max of laplacian_f over a radial grid on D(R/4)); throws if
// the minimum over the grid is <= 0 (invalid eigenfunction)
double validate_delta0(const ConformalMetric& cm, int grid_points = 512);

}  // namespace finsler
