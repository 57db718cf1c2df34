#include "finsler/volume.hpp"

#include <cmath>
#include <stdexcept>

#include "finsler/quadrature.hpp"

namespace finsler {

Indicatrix indicatrix_sample(const FinslerHandle& h, const DiskPoint& p, int n) {
  if (n < 64) throw std::invalid_argument("indicatrix_sample: n must be >= 64");
  Indicatrix ind;
  ind.point = p;
  ind.count = n;
  ind.vertices.reserve(n);
  if (h.fall_through(p) || (h.table_mode() && h.has_radial_table())) {
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * M_PI * k / n;
      const TangentVector u{std::cos(th), std::sin(th)};
      ind.vertices.push_back(u / h.finsler_eval(p, u));
    }
    return ind;
  }
  const BoundaryData bd = h.boundary_data(p);
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * M_PI * k / n;
    const TangentVector u{std::cos(th), std::sin(th)};
    ind.vertices.push_back(u / h.eval_with_data(bd, u));
  }
  return ind;
}

PolarBody polar_body_sample(const FinslerHandle& h, const DiskPoint& p, int n) {
  PolarBody body;
  body.point = p;
  body.support_samples.reserve(n);
  if (h.fall_through(p)) {
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * M_PI * k / n;
      body.support_samples.emplace_back(th, 1.0 / h.dual_norm(p, {std::cos(th), std::sin(th)}));
    }
    return body;
  }
  const BoundaryData bd = h.boundary_data(p);
  double hint = std::nan("");
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * M_PI * k / n;
    const double fs = h.dual_norm_with_data(bd, {std::cos(th), std::sin(th)}, &hint);
    body.support_samples.emplace_back(th, 1.0 / fs);
  }
  return body;
}

double polar_dual_area(const FinslerHandle& h, const DiskPoint& p, int n) {
  if (n < 128) throw std::invalid_argument("polar_dual_area: n must be >= 128");
  const PolarBody body = polar_body_sample(h, p, n);
  // periodic trapezoid over uniform angles
  double sum = 0.0;
  for (const auto& [th, r] : body.support_samples) sum += r * r;
  return 0.5 * sum * (2.0 * M_PI / n);
}

double ht_volume(const FinslerHandle& h, const VolumeRegion& region, int radial_nodes,
                 bool use_symmetry, int angular_nodes) {
  if (region.empty()) return 0.0;
  if (region.r_outer > h.R() + 1e-12)
    throw std::invalid_argument("ht_volume: region extends outside the closed disk");
  const int n_dual = std::max(128, angular_nodes * 2);

  auto radial_piece = [&](double a, double b, auto area_at) {
    if (b <= a) return 0.0;
    return gl_integrate([&](double r) { return area_at(r) * r; }, a, b, radial_nodes);
  };

  if (use_symmetry) {
    auto area_on_axis = [&](double r) { return polar_dual_area(h, {r, 0.0}, n_dual); };
    // split at the fall-through radius: the integrand switches evaluation
    // branch there
    const double split = std::min(std::max(h.R0(), region.r_inner), region.r_outer);
    const double inner = radial_piece(region.r_inner, split, area_on_axis);
    const double outer = radial_piece(split, region.r_outer, area_on_axis);
    return 2.0 * (inner + outer);  // (1/pi) * 2*pi * int A(r) r dr
  }

  // full polar product grid: GL in radius, periodic trapezoid in angle
  double total = 0.0;
  for (int j = 0; j < angular_nodes; ++j) {
    const double th = 2.0 * M_PI * j / angular_nodes;
    auto area_at = [&](double r) {
      return polar_dual_area(h, {r * std::cos(th), r * std::sin(th)}, n_dual);
    };
    const double split = std::min(std::max(h.R0(), region.r_inner), region.r_outer);
    total += radial_piece(region.r_inner, split, area_at) +
             radial_piece(split, region.r_outer, area_at);
  }
  return total * (2.0 / angular_nodes);
}

double ellipse_residual(const Indicatrix& ind) {
  if (ind.count < 128)
    throw std::invalid_argument("ellipse_residual: indicatrix must have >= 128 vertices");
  // least squares for Q = (q11, q12, q22) in v^T Q v = 1
  double M[3][3] = {};
  double rhs[3] = {};
  for (const TangentVector& v : ind.vertices) {
    const double row[3] = {v.x * v.x, 2.0 * v.x * v.y, v.y * v.y};
    for (int i = 0; i < 3; ++i) {
      rhs[i] += row[i];
      for (int j = 0; j < 3; ++j) M[i][j] += row[i] * row[j];
    }
  }
  // Gaussian elimination with partial pivoting
  int idx[3] = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r2 = c + 1; r2 < 3; ++r2)
      if (std::abs(M[idx[r2]][c]) > std::abs(M[idx[piv]][c])) piv = r2;
    std::swap(idx[c], idx[piv]);
    const double diag = M[idx[c]][c];
    if (std::abs(diag) < 1e-14)
      throw std::runtime_error("ellipse_residual: singular normal equations");
    for (int r2 = c + 1; r2 < 3; ++r2) {
      const double f = M[idx[r2]][c] / diag;
      for (int cc = c; cc < 3; ++cc) M[idx[r2]][cc] -= f * M[idx[c]][cc];
      rhs[idx[r2]] -= f * rhs[idx[c]];
    }
  }
  double q[3];
  for (int c = 2; c >= 0; --c) {
    double s = rhs[idx[c]];
    for (int cc = c + 1; cc < 3; ++cc) s -= M[idx[c]][cc] * q[cc];
    q[c] = s / M[idx[c]][c];
  }
  double ss = 0.0;
  for (const TangentVector& v : ind.vertices) {
    const double r = q[0] * v.x * v.x + 2.0 * q[1] * v.x * v.y + q[2] * v.y * v.y - 1.0;
    ss += r * r;
  }
  return std::sqrt(ss / ind.count);
}

}  // namespace finsler
