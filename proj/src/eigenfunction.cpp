#include "finsler/eigenfunction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace finsler {

namespace {

// series around r=0: psi = 1 - a r^2/4 + a(a + 2/3) r^4/64
void series_start(double a, double r, double& psi, double& dpsi) {
  const double c2 = -a / 4.0;
  const double c4 = a * (a + 2.0 / 3.0) / 64.0;
  psi = 1.0 + c2 * r * r + c4 * r * r * r * r;
  dpsi = 2.0 * c2 * r + 4.0 * c4 * r * r * r;
}

struct ShotResult {
  std::vector<double> psi;
  std::vector<double> dpsi;
};

// fixed-step RK4 on the uniform grid, substeps per interval; starts from the
// series at the first node to avoid the coth singularity
ShotResult shoot(double a, const std::vector<double>& grid, int substeps) {
  const int n = static_cast<int>(grid.size());
  ShotResult out;
  out.psi.resize(n);
  out.dpsi.resize(n);
  out.psi[0] = 1.0;
  out.dpsi[0] = 0.0;
  series_start(a, grid[1], out.psi[1], out.dpsi[1]);

  auto rhs = [a](double r, double y0, double y1, double& d0, double& d1) {
    d0 = y1;
    d1 = -y1 / std::tanh(r) - a * y0;
  };

  double y0 = out.psi[1], y1 = out.dpsi[1];
  for (int i = 1; i + 1 < n; ++i) {
    const double h = (grid[i + 1] - grid[i]) / substeps;
    double r = grid[i];
    for (int s = 0; s < substeps; ++s) {
      double k10, k11, k20, k21, k30, k31, k40, k41;
      rhs(r, y0, y1, k10, k11);
      rhs(r + h / 2, y0 + h / 2 * k10, y1 + h / 2 * k11, k20, k21);
      rhs(r + h / 2, y0 + h / 2 * k20, y1 + h / 2 * k21, k30, k31);
      rhs(r + h, y0 + h * k30, y1 + h * k31, k40, k41);
      y0 += h / 6 * (k10 + 2 * k20 + 2 * k30 + k40);
      y1 += h / 6 * (k11 + 2 * k21 + 2 * k31 + k41);
      r += h;
    }
    out.psi[i + 1] = y0;
    out.dpsi[i + 1] = y1;
  }
  return out;
}

}  // namespace

RadialEigenfunction solve_radial_eigenfunction(double R, int grid_size, double tol,
                                               const EigenSolveOptions& opt) {
  if (R <= 0.0 || R >= 1.0) throw std::invalid_argument("R must be in (0,1)");
  if (grid_size < 64) throw std::invalid_argument("grid_size must be >= 64");

  const double rmax = std::atanh(R);
  std::vector<double> grid(grid_size + 1);
  for (int i = 0; i <= grid_size; ++i) grid[i] = rmax * i / grid_size;

  auto endpoint = [&](double a) { return shoot(a, grid, opt.rk_substeps).psi.back(); };

  // scan for the first sign change of the endpoint value
  double lo = opt.bracket_lo, hi = 0.0;
  double flo = endpoint(lo);
  bool found = false;
  for (double a = lo + opt.scan_step; a <= opt.bracket_hi; a += opt.scan_step) {
    const double fa = endpoint(a);
    if (flo * fa <= 0.0) {
      hi = a;
      found = true;
      break;
    }
    lo = a;
    flo = fa;
  }
  if (!found)
    throw std::runtime_error("eigenvalue bracket not found in [0.1, 200]");

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = endpoint(mid);
    if (flo * fm <= 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
    if (hi - lo < 1e-14 * hi) break;
  }
  const double a_star = 0.5 * (lo + hi);

  RadialEigenfunction e;
  e.R = R;
  e.geodesic_radius = rmax;
  e.eigenvalue_a = a_star;
  e.r = grid;
  ShotResult shot = shoot(a_star, grid, opt.rk_substeps);
  e.psi = std::move(shot.psi);
  e.dpsi = std::move(shot.dpsi);

  // first eigenfunction: no interior zero
  for (int i = 0; i + 1 < static_cast<int>(e.psi.size()); ++i)
    if (e.psi[i] <= 0.0)
      throw std::runtime_error("eigenfunction has an interior zero; not the first eigenpair");

  // normalize max psi = 1 (max is at r=0 for the first eigenfunction)
  const double scale = 1.0 / e.psi[0];
  for (auto& v : e.psi) v *= scale;
  for (auto& v : e.dpsi) v *= scale;
  if (std::abs(e.psi.back()) > tol)
    throw std::runtime_error("endpoint residual exceeds tolerance");
  e.psi.back() = 0.0;  // pin the Dirichlet endpoint
  return e;
}

double RadialEigenfunction::value(double rq) const {
  if (rq <= 0.0) return psi[0];
  if (rq >= geodesic_radius) return 0.0;
  const int n = static_cast<int>(r.size()) - 1;
  const double h = geodesic_radius / n;
  int i = std::min(static_cast<int>(rq / h), n - 1);
  const double t = (rq - r[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * psi[i] + h10 * h * dpsi[i] + h01 * psi[i + 1] + h11 * h * dpsi[i + 1];
}

double RadialEigenfunction::derivative(double rq) const {
  if (rq <= 0.0) return 0.0;
  if (rq >= geodesic_radius) rq = geodesic_radius;
  const int n = static_cast<int>(r.size()) - 1;
  const double h = geodesic_radius / n;
  int i = std::min(static_cast<int>(rq / h), n - 1);
  const double t = (rq - r[i]) / h;
  const double t2 = t * t;
  const double d00 = (6 * t2 - 6 * t) / h, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h, d11 = 3 * t2 - 2 * t;
  return d00 * psi[i] + d10 * dpsi[i] + d01 * psi[i + 1] + d11 * dpsi[i + 1];
}

double RadialEigenfunction::second_derivative(double rq) const {
  if (rq < 1e-9) return -eigenvalue_a / 2.0 * value(0.0);
  return -derivative(rq) / std::tanh(rq) - eigenvalue_a * value(rq);
}

// second derivative of the Hermite interpolant itself (not the ODE relation)
double RadialEigenfunction::interpolant_second_derivative(double rq) const {
  if (rq <= 0.0 || rq >= geodesic_radius) rq = std::clamp(rq, 0.0, geodesic_radius);
  const int n = static_cast<int>(r.size()) - 1;
  const double h = geodesic_radius / n;
  int i = std::min(static_cast<int>(rq / h), n - 1);
  const double t = (rq - r[i]) / h;
  return ((12 * t - 6) * psi[i] + (6 * t - 4) * h * dpsi[i] + (-12 * t + 6) * psi[i + 1] +
          (6 * t - 2) * h * dpsi[i + 1]) /
         (h * h);
}

double RadialEigenfunction::ode_residual(int n_midpoints) const {
  double worst = 0.0;
  for (int k = 0; k < n_midpoints; ++k) {
    const double rq = geodesic_radius * (k + 0.5) / n_midpoints;
    const double res = interpolant_second_derivative(rq) + derivative(rq) / std::tanh(rq) +
                       eigenvalue_a * value(rq);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

void save_eigenfunction_csv(const RadialEigenfunction& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "r,psi,dpsi\n";
  char buf[128];
  for (size_t i = 0; i < e.r.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", e.r[i], e.psi[i], e.dpsi[i]);
    out << buf;
  }
}

bool load_eigenfunction_csv(RadialEigenfunction& e, const std::string& path, double R,
                            int grid_size) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line) || line.rfind("r,psi,dpsi", 0) != 0) return false;
  std::vector<double> rs, ps, ds;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double a, b, c;
    char comma;
    if (!(ss >> a >> comma >> b >> comma >> c)) return false;
    rs.push_back(a);
    ps.push_back(b);
    ds.push_back(c);
  }
  if (static_cast<int>(rs.size()) != grid_size + 1) return false;
  const double rmax = std::atanh(R);
  if (std::abs(rs.back() - rmax) > 1e-12) return false;

  e.R = R;
  e.geodesic_radius = rmax;
  e.r = std::move(rs);
  e.psi = std::move(ps);
  e.dpsi = std::move(ds);
  // eigenvalue recovered from the ODE at an interior node
  const double rq = e.r[grid_size / 2] + 0.5 * rmax / grid_size;
  e.eigenvalue_a =
      -(e.interpolant_second_derivative(rq) + e.derivative(rq) / std::tanh(rq)) / e.value(rq);
  return e.ode_residual(100) < 1e-4;
}

}  // namespace finsler
