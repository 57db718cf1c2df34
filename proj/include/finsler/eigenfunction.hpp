#pragma once

#include <string>
#include <vector>

namespace finsler {

// First Dirichlet eigenpair of the hyperbolic Laplacian on the disk D(R),
// radial profile in the geodesic radius r = arctanh|p|:
//   psi'' + coth(r) psi' + a psi = 0,  psi'(0) = 0,  psi(arctanh R) = 0,
// normalized so max psi = psi(0) = 1.
struct RadialEigenfunction {
  double R = 0.0;
  double geodesic_radius = 0.0;  // arctanh R
  double eigenvalue_a = 0.0;
  std::vector<double> r;     // uniform grid on [0, geodesic_radius]
  std::vector<double> psi;
  std::vector<double> dpsi;
  int interpolation_order = 3;  // cubic Hermite between nodes

  double value(double r_query) const;
  double derivative(double r_query) const;
  // recovered from the ODE itself
  double second_derivative(double r_query) const;
  // second derivative of the cubic interpolant (used by the ODE residual)
  double interpolant_second_derivative(double r_query) const;

  // residual of the ODE under the interpolant at n interior midpoints
  double ode_residual(int n_midpoints) const;
};

struct EigenSolveOptions {
  double bracket_lo = 0.1;
  double bracket_hi = 200.0;
  double scan_step = 0.5;
  int rk_substeps = 8;
};

RadialEigenfunction solve_radial_eigenfunction(double R, int grid_size, double tol,
                                               const EigenSolveOptions& opt = {});

// CSV cache, header "r,psi,dpsi", 17 significant digits
void save_eigenfunction_csv(const RadialEigenfunction& e, const std::string& path);
bool load_eigenfunction_csv(RadialEigenfunction& e, const std::string& path, double R,
                            int grid_size);

}  // namespace finsler
