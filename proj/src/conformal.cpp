#include "finsler/conformal.hpp"

#include <cmath>
#include <stdexcept>

namespace finsler {

ConformalMetric::ConformalMetric(double lambda, double R,
                                 std::shared_ptr<const RadialEigenfunction> eigen)
    : lambda_(lambda), R_(R), eigen_(std::move(eigen)), cutoff_(R / 4.0, R / 2.0), delta0_(0.0) {
  if (std::abs(eigen_->R - R) > 1e-12)
    throw std::invalid_argument("eigenfunction was solved for a different R");
  build_profile_table();
  delta0_ = validate_delta0(*this);
}

// Tabulates F(s) = psi(arctanh s) theta(s) with three derivatives on a fine
// uniform s-grid; the flow right-hand sides interpolate these instead of
// re-evaluating the transcendental chain.
void ConformalMetric::build_profile_table() {
  table_n_ = 8192;
  const double s_max = cutoff_.outer_radius;
  table_h_ = s_max / table_n_;
  tf_.resize(table_n_ + 1);
  tf1_.resize(table_n_ + 1);
  tf2_.resize(table_n_ + 1);
  tf3_.resize(table_n_ + 1);
  const double a = eigen_->eigenvalue_a;
  for (int k = 0; k <= table_n_; ++k) {
    const double s = k * table_h_;
    const double r = std::atanh(s);
    const double P = eigen_->value(r);
    const double P1 = eigen_->derivative(r);
    double P2, P3;
    if (r < 1e-7) {
      P2 = -a / 2.0 * P;
      P3 = 0.0;
    } else {
      const double coth = 1.0 / std::tanh(r);
      const double csch2 = coth * coth - 1.0;  // d/dr coth = -csch^2
      P2 = -coth * P1 - a * P;
      P3 = csch2 * P1 - coth * P2 - a * P1;
    }
    const double T = cutoff_.value(s);
    const double T1 = cutoff_.d1(s);
    const double T2 = cutoff_.d2(s);
    const double T3 = cutoff_.d3(s);
    // r(s) = arctanh s
    const double w = 1.0 - s * s;
    const double r1 = 1.0 / w;
    const double r2 = 2.0 * s / (w * w);
    const double r3 = (2.0 + 6.0 * s * s) / (w * w * w);
    // psi(r(s)) derivatives in s
    const double Ps1 = P1 * r1;
    const double Ps2 = P2 * r1 * r1 + P1 * r2;
    const double Ps3 = P3 * r1 * r1 * r1 + 3.0 * P2 * r1 * r2 + P1 * r3;
    tf_[k] = P * T;
    tf1_[k] = Ps1 * T + P * T1;
    tf2_[k] = Ps2 * T + 2.0 * Ps1 * T1 + P * T2;
    tf3_[k] = Ps3 * T + 3.0 * Ps2 * T1 + 3.0 * Ps1 * T2 + P * T3;
  }
  // pin the outer end of the support
  tf_[table_n_] = tf1_[table_n_] = tf2_[table_n_] = tf3_[table_n_] = 0.0;
}

void ConformalMetric::radial_profile(double s, double& f, double& d1, double& d2) const {
  if (s >= cutoff_.outer_radius || lambda_ == 0.0) {
    // table also valid at lambda=0 (profile is lambda-independent), but the
    // flat case never asks
    if (s >= cutoff_.outer_radius) {
      f = d1 = d2 = 0.0;
      return;
    }
  }
  const double x = s / table_h_;
  const int i = std::min(static_cast<int>(x), table_n_ - 1);
  const double t = x - i;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = (6 * t2 - 6 * t) / table_h_, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / table_h_, d11 = 3 * t2 - 2 * t;
  f = h00 * tf_[i] + h10 * table_h_ * tf1_[i] + h01 * tf_[i + 1] + h11 * table_h_ * tf1_[i + 1];
  d1 = h00 * tf1_[i] + h10 * table_h_ * tf2_[i] + h01 * tf1_[i + 1] +
       h11 * table_h_ * tf2_[i + 1];
  d2 = h00 * tf2_[i] + h10 * table_h_ * tf3_[i] + h01 * tf2_[i + 1] +
       h11 * table_h_ * tf3_[i + 1];
}

void ConformalMetric::conformal_derivatives(const DiskPoint& p, TangentVector& du,
                                            double hess[2][2]) const {
  const double l2 = lambda_ * lambda_;
  const double s = norm(p);
  if (l2 == 0.0 || s >= cutoff_.outer_radius) {
    du = {0.0, 0.0};
    hess[0][0] = hess[0][1] = hess[1][0] = hess[1][1] = 0.0;
    return;
  }
  double f, d1, d2;
  radial_profile(s, f, d1, d2);
  if (s < 1e-9) {
    du = {0.0, 0.0};
    hess[0][0] = hess[1][1] = l2 * d2;
    hess[0][1] = hess[1][0] = 0.0;
    return;
  }
  const double nx = p.x / s, ny = p.y / s;
  du = {l2 * d1 * nx, l2 * d1 * ny};
  const double radial_term = l2 * (d2 - d1 / s);
  const double iso = l2 * d1 / s;
  hess[0][0] = radial_term * nx * nx + iso;
  hess[0][1] = radial_term * nx * ny;
  hess[1][0] = hess[0][1];
  hess[1][1] = radial_term * ny * ny + iso;
}

ConformalMetric::RadialDerivs ConformalMetric::radial(double r) const {
  RadialDerivs d;
  const double t = std::tanh(r);
  const double sech2 = 1.0 - t * t;
  const double P = eigen_->value(r);
  const double dP = eigen_->derivative(r);
  const double ddP = eigen_->second_derivative(r);
  const double Th = cutoff_.value(t);
  // theta as a function of r through t = tanh r
  const double dTh = cutoff_.d1(t) * sech2;
  const double ddTh = cutoff_.d2(t) * sech2 * sech2 + cutoff_.d1(t) * (-2.0 * t * sech2);
  d.f = P * Th;
  d.dfdr = dP * Th + P * dTh;
  d.ddfdr = ddP * Th + 2.0 * dP * dTh + P * ddTh;
  return d;
}

double ConformalMetric::f_eval(const DiskPoint& p) const {
  const double s = norm(p);
  if (s >= cutoff_.outer_radius) return 0.0;
  return eigen_->value(std::atanh(s)) * cutoff_.value(s);
}

double ConformalMetric::radial_profile_d1(double s) const {
  const double r = std::atanh(s);
  const double P = eigen_->value(r);
  const double dP = eigen_->derivative(r);
  return dP / (1.0 - s * s) * cutoff_.value(s) + P * cutoff_.d1(s);
}

TangentVector ConformalMetric::f_grad(const DiskPoint& p) const {
  const double s = norm(p);
  if (s >= cutoff_.outer_radius) return {0.0, 0.0};
  if (s < 1e-12) return {0.0, 0.0};  // dF/ds -> 0 like s at the center
  const double d1 = radial_profile_d1(s);
  return {d1 * p.x / s, d1 * p.y / s};
}

double ConformalMetric::laplacian_f(const DiskPoint& p) const {
  const double s = norm(p);
  if (s >= cutoff_.outer_radius) return 0.0;
  const double r = std::atanh(s);
  if (r < 1e-7) {
    // limit of -(f'' + coth(r) f') as r -> 0 is -2 f''(0) = a f(0)
    return eigen_->eigenvalue_a * f_eval(p);
  }
  const RadialDerivs d = radial(r);
  return -(d.ddfdr + d.dfdr / std::tanh(r));
}

double ConformalMetric::alpha(const DiskPoint& p) const {
  return std::exp(2.0 * lambda_ * lambda_ * f_eval(p));
}

MetricTensor2 ConformalMetric::g_lambda_tensor(const DiskPoint& p) const {
  MetricTensor2 g = g0_tensor(p);
  const double a = alpha(p);
  g.g11 *= a;
  g.g12 *= a;
  g.g22 *= a;
  return g;
}

double ConformalMetric::gaussian_curvature(const DiskPoint& p) const {
  const double l2 = lambda_ * lambda_;
  return -(1.0 - l2 * laplacian_f(p)) * std::exp(-2.0 * l2 * f_eval(p));
}

void ConformalMetric::conformal_exponent(const DiskPoint& p, double& u, TangentVector& du) const {
  const double l2 = lambda_ * lambda_;
  const double s = norm(p);
  if (l2 == 0.0 || s >= cutoff_.outer_radius) {
    u = 0.0;
    du = {0.0, 0.0};
    return;
  }
  double f, d1, d2;
  radial_profile(s, f, d1, d2);
  u = l2 * f;
  du = s < 1e-9 ? TangentVector{0.0, 0.0} : TangentVector{l2 * d1 * p.x / s, l2 * d1 * p.y / s};
}

double validate_delta0(const ConformalMetric& cm, int grid_points) {
  const double rmax = cm.R() / 4.0;
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= grid_points; ++i) {
    const double s = rmax * i / grid_points;
    const double lap = cm.laplacian_f({s, 0.0});
    lo = std::min(lo, lap);
    hi = std::max(hi, lap);
  }
  if (lo <= 0.0)
    throw std::runtime_error("Laplacian of f not positive on D(R/4): eigenfunction invalid");
  return 1.0 / std::sqrt(hi);
}

}  // namespace finsler
