#pragma once

#include <vector>

#include "finsler/finsler_metric.hpp"

namespace finsler {

struct Indicatrix {
  DiskPoint point;
  std::vector<TangentVector> vertices;  // F(point, vertex) = 1, ordered by angle
  int count = 0;
};

struct PolarBody {
  DiskPoint point;
  std::vector<std::pair<double, double>> support_samples;  // (angle, 1/F*(p, u_angle))
};

struct VolumeRegion {
  double r_inner = 0.0;
  double r_outer = 0.0;

  static VolumeRegion disk(double r) { return {0.0, r}; }
  static VolumeRegion annulus(double r0, double r1) { return {r0, r1}; }
  bool empty() const { return r_outer <= r_inner; }
};

Indicatrix indicatrix_sample(const FinslerHandle& h, const DiskPoint& p, int n);

PolarBody polar_body_sample(const FinslerHandle& h, const DiskPoint& p, int n);

// area of the polar dual body in the flat-chart dual coordinates:
// (1/2) * int dtheta / F*(p, u_theta)^2
double polar_dual_area(const FinslerHandle& h, const DiskPoint& p, int n);

// Holmes-Thompson volume of the region: (1/pi) * iint polar_dual_area dp.
// With use_symmetry, the angular integral collapses by rotation invariance;
// otherwise a full polar product grid is used.
double ht_volume(const FinslerHandle& h, const VolumeRegion& region, int radial_nodes,
                 bool use_symmetry = true, int angular_nodes = 64);

// normalized RMS residual of the best centered-ellipse fit v^T Q v = 1
double ellipse_residual(const Indicatrix& ind);

// closed-form hyperbolic area of D(r) in the Klein chart
inline double hyperbolic_disk_area(double r) {
  return 2.0 * M_PI * (1.0 / std::sqrt(1.0 - r * r) - 1.0);
}

}  // namespace finsler
