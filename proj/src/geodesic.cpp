#include "finsler/geodesic.hpp"

#include <cmath>
#include <stdexcept>

namespace finsler {

Christoffels christoffels(const ConformalMetric& cm, const DiskPoint& p) {
  require_inside_disk(p);
  Christoffels G;
  const double d = 1.0 - norm2(p);
  const double pc[2] = {p.x, p.y};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        G.g[k][i][j] = ((i == k ? pc[j] : 0.0) + (j == k ? pc[i] : 0.0)) / d;

  double u;
  TangentVector du;
  cm.conformal_exponent(p, u, du);
  if (du.x != 0.0 || du.y != 0.0) {
    const MetricTensor2 g0 = g0_tensor(p);
    const double g0m[2][2] = {{g0.g11, g0.g12}, {g0.g12, g0.g22}};
    // g0^{-1} = (1-|p|^2)(I - p p^T)
    const double gi[2][2] = {{d * (1.0 - p.x * p.x), d * (-p.x * p.y)},
                             {d * (-p.x * p.y), d * (1.0 - p.y * p.y)}};
    const double duc[2] = {du.x, du.y};
    for (int k = 0; k < 2; ++k) {
      const double gidu = gi[k][0] * duc[0] + gi[k][1] * duc[1];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          G.g[k][i][j] += (i == k ? duc[j] : 0.0) + (j == k ? duc[i] : 0.0) - g0m[i][j] * gidu;
    }
  }
  return G;
}

void christoffels_with_derivatives(const ConformalMetric& cm, const DiskPoint& p,
                                   Christoffels& G, double dG[2][2][2][2]) {
  const double d = 1.0 - norm2(p);
  const double pc[2] = {p.x, p.y};
  auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };

  // Klein part: Gamma^k_ij = (d^k_i p_j + d^k_j p_i)/d
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double num = kron(i, k) * pc[j] + kron(j, k) * pc[i];
        G.g[k][i][j] = num / d;
        for (int l = 0; l < 2; ++l)
          dG[k][i][j][l] = (kron(i, k) * kron(j, l) + kron(j, k) * kron(i, l)) / d +
                           num * 2.0 * pc[l] / (d * d);
      }

  TangentVector du;
  double uh[2][2];
  cm.conformal_derivatives(p, du, uh);
  if (du.x == 0.0 && du.y == 0.0 && uh[0][0] == 0.0 && uh[1][1] == 0.0) return;

  const double duc[2] = {du.x, du.y};
  double g0m[2][2], dg0[2][2][2];  // dg0[i][j][l] = d g0_ij / d x_l
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g0m[i][j] = kron(i, j) / d + pc[i] * pc[j] / (d * d);
      for (int l = 0; l < 2; ++l)
        dg0[i][j][l] = kron(i, j) * 2.0 * pc[l] / (d * d) +
                       (kron(i, l) * pc[j] + pc[i] * kron(j, l)) / (d * d) +
                       pc[i] * pc[j] * 4.0 * pc[l] / (d * d * d);
    }
  // g0^{-1} = d (I - p p^T)
  double gi[2][2], dgi[2][2][2];
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 2; ++m) {
      gi[k][m] = d * (kron(k, m) - pc[k] * pc[m]);
      for (int l = 0; l < 2; ++l)
        dgi[k][m][l] = -2.0 * pc[l] * (kron(k, m) - pc[k] * pc[m]) -
                       d * (kron(k, l) * pc[m] + pc[k] * kron(m, l));
    }

  for (int k = 0; k < 2; ++k) {
    const double gidu = gi[k][0] * duc[0] + gi[k][1] * duc[1];
    double dgidu[2];
    for (int l = 0; l < 2; ++l)
      dgidu[l] = dgi[k][0][l] * duc[0] + dgi[k][1][l] * duc[1] + gi[k][0] * uh[0][l] +
                 gi[k][1] * uh[1][l];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        G.g[k][i][j] += kron(i, k) * duc[j] + kron(j, k) * duc[i] - g0m[i][j] * gidu;
        for (int l = 0; l < 2; ++l)
          dG[k][i][j][l] += kron(i, k) * uh[j][l] + kron(j, k) * uh[i][l] -
                            dg0[i][j][l] * gidu - g0m[i][j] * dgidu[l];
      }
  }
}

namespace {

struct ChordParam {
  Vec2 u;        // unit chord direction
  double s_lo;   // ideal endpoint parameters: |x + s u| = 1
  double s_hi;
  double L;      // Euclidean distance x -> y
  double kappa;  // log(Q1/Q0)
  double Q0;
};

ChordParam chord_param(const DiskPoint& x, const DiskPoint& y) {
  ChordParam c;
  const Vec2 delta = y - x;
  c.L = norm(delta);
  if (c.L < 1e-300) throw std::invalid_argument("chord endpoints coincide");
  c.u = delta / c.L;
  const double b = dot(x, c.u);
  const double disc = std::sqrt(std::max(b * b - (norm2(x) - 1.0), 0.0));
  c.s_lo = -b - disc;
  c.s_hi = -b + disc;
  c.Q0 = -c.s_lo / c.s_hi;
  const double Q1 = (c.L - c.s_lo) / (c.s_hi - c.L);
  c.kappa = std::log(Q1 / c.Q0);
  return c;
}

}  // namespace

GeodesicState klein_chord_state(const DiskPoint& x, const DiskPoint& y, double t) {
  const ChordParam c = chord_param(x, y);
  const double Q = c.Q0 * std::exp(c.kappa * t);
  const double s = (c.s_lo + Q * c.s_hi) / (1.0 + Q);
  const double ds = c.kappa * Q * (c.s_hi - c.s_lo) / ((1.0 + Q) * (1.0 + Q));
  return {x + s * c.u, ds * c.u};
}

double segment_origin_distance(const DiskPoint& x, const DiskPoint& y) {
  const Vec2 d = y - x;
  const double L2 = norm2(d);
  double t = L2 > 0.0 ? -dot(x, d) / L2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  return norm(x + t * d);
}

bool GeodesicEngine::chord_exact(const DiskPoint& x, const DiskPoint& y) const {
  if (cm->is_flat_deformation()) return true;
  return segment_origin_distance(x, y) >= cm->R() / 2.0;
}

GeodesicState GeodesicEngine::exp_map(const DiskPoint& x, const TangentVector& v, double t) const {
  if (std::abs(t) > horizon)
    throw HorizonError("exp_map horizon exceeded");
  if (t == 0.0 || (v.x == 0.0 && v.y == 0.0)) return {x, v};
  State4 y = {x.x, x.y, v.x, v.y};
  const ConformalMetric* metric = cm;
  auto rhs = [metric](double, const State4& s, State4& ds) {
    const Christoffels G = christoffels(*metric, {s[0], s[1]});
    const double vx = s[2], vy = s[3];
    ds[0] = vx;
    ds[1] = vy;
    ds[2] = -(G.g[0][0][0] * vx * vx + 2.0 * G.g[0][0][1] * vx * vy + G.g[0][1][1] * vy * vy);
    ds[3] = -(G.g[1][0][0] * vx * vx + 2.0 * G.g[1][0][1] * vx * vy + G.g[1][1][1] * vy * vy);
  };
  dp54_integrate(rhs, y, 0.0, t, ode);
  return {{y[0], y[1]}, {y[2], y[3]}};
}

// augmented state: (q, v, Jq_col1, Jv_col1, Jq_col2, Jv_col2) with
// J = d(q, v)/d(initial velocity)
void GeodesicEngine::flow_with_variation(const DiskPoint& x, const TangentVector& w,
                                         double t_waypoint, double t_end,
                                         GPointVariation& out) const {
  const ConformalMetric* metric = cm;
  auto rhs = [metric](double, const std::array<double, 12>& s, std::array<double, 12>& ds) {
    const DiskPoint q{s[0], s[1]};
    const double v[2] = {s[2], s[3]};
    Christoffels G;
    double dG[2][2][2][2];
    christoffels_with_derivatives(*metric, q, G, dG);
    ds[0] = v[0];
    ds[1] = v[1];
    for (int k = 0; k < 2; ++k) {
      double acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) acc += G.g[k][i][j] * v[i] * v[j];
      ds[2 + k] = -acc;
    }
    for (int col = 0; col < 2; ++col) {
      const double* Jq = &s[4 + 4 * col];
      const double* Jv = &s[6 + 4 * col];
      double* dJq = &ds[4 + 4 * col];
      double* dJv = &ds[6 + 4 * col];
      dJq[0] = Jv[0];
      dJq[1] = Jv[1];
      for (int k = 0; k < 2; ++k) {
        double term = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            for (int l = 0; l < 2; ++l) term += dG[k][i][j][l] * v[i] * v[j] * Jq[l];
            term += 2.0 * G.g[k][i][j] * v[i] * Jv[j];
          }
        dJv[k] = -term;
      }
    }
  };
  static const std::function<bool(const std::array<double, 12>&)> inside =
      [](const std::array<double, 12>& s) { return s[0] * s[0] + s[1] * s[1] < 1.0; };

  std::array<double, 12> z{x.x, x.y, w.x, w.y, 0, 0, 1, 0, 0, 0, 0, 1};
  const bool record = t_waypoint > 0.0 && t_waypoint < t_end;
  if (record) {
    dp54_integrate_n<12>(rhs, z, 0.0, t_waypoint, ode, inside);
    out.pos_t = {z[0], z[1]};
    out.vel_t = {z[2], z[3]};
    out.dpos_dw_t = {z[4], z[8], z[5], z[9]};
    out.dvel_dw_t = {z[6], z[10], z[7], z[11]};
    dp54_integrate_n<12>(rhs, z, t_waypoint, t_end, ode, inside);
  } else {
    dp54_integrate_n<12>(rhs, z, 0.0, t_end, ode, inside);
  }
  if (!record) {
    out.pos_t = {z[0], z[1]};
    out.vel_t = {z[2], z[3]};
    out.dpos_dw_t = {z[4], z[8], z[5], z[9]};
    out.dvel_dw_t = {z[6], z[10], z[7], z[11]};
  }
  out.pos_1 = {z[0], z[1]};
  out.dpos_dw_1 = {z[4], z[8], z[5], z[9]};
  out.shoot = w;
}

ShootingResult GeodesicEngine::connect(const DiskPoint& x, const DiskPoint& y,
                                       const TangentVector* seed) const {
  if (chord_exact(x, y)) {
    return {klein_chord_state(x, y, 0.0).velocity, 0.0, 0};
  }
  TangentVector w = seed ? *seed : klein_chord_state(x, y, 0.0).velocity;
  ShootingResult res;
  GPointVariation fv;
  bool polish = false;  // one extra Newton step past the tolerance keeps the
                        // solution a smooth function of the endpoints
  for (int it = 0; it < max_newton; ++it) {
    flow_with_variation(x, w, -1.0, 1.0, fv);
    const Vec2 r = fv.pos_t - y;
    res.residual = norm(r);
    res.iterations = it;
    if (polish || res.residual == 0.0) {
      res.initial_velocity = w;
      return res;
    }
    if (res.residual < shoot_tol) polish = true;
    w -= inverse(fv.dpos_dw_1) * r;
  }
  throw std::runtime_error("connect: Newton shooting did not converge");
}

GeodesicState GeodesicEngine::g_point_state(const DiskPoint& x, const DiskPoint& y, double t,
                                            const TangentVector* shoot_seed,
                                            TangentVector* shoot_out) const {
  if (chord_exact(x, y)) {
    if (shoot_out) *shoot_out = klein_chord_state(x, y, 0.0).velocity;
    return klein_chord_state(x, y, t);
  }
  const ShootingResult sr = connect(x, y, shoot_seed);
  if (shoot_out) *shoot_out = sr.initial_velocity;
  return exp_map(x, sr.initial_velocity, t);
}

GPointVariation GeodesicEngine::g_point_variation(const DiskPoint& x, const DiskPoint& y,
                                                  double t,
                                                  const TangentVector* shoot_seed) const {
  GPointVariation out;
  if (chord_exact(x, y)) {
    const GeodesicState st = klein_chord_state(x, y, t);
    out.pos_t = st.position;
    out.vel_t = st.velocity;
    out.shoot = klein_chord_state(x, y, 0.0).velocity;
    out.chord = true;
    return out;
  }
  TangentVector w = shoot_seed ? *shoot_seed : klein_chord_state(x, y, 0.0).velocity;
  bool polish = false;
  for (int it = 0; it < max_newton; ++it) {
    flow_with_variation(x, w, t, 1.0, out);
    const Vec2 r = out.pos_1 - y;
    if (polish || norm(r) == 0.0) return out;
    if (norm(r) < shoot_tol) polish = true;
    w -= inverse(out.dpos_dw_1) * r;
  }
  throw std::runtime_error("g_point_variation: Newton shooting did not converge");
}

}  // namespace finsler
