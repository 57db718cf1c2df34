#include "finsler/curves.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/smoothstep.hpp"

namespace finsler {

namespace {

// closed-form chord geodesic point, templated so jets give exact derivatives
// with respect to the endpoint angle and the parameter t
template <class T>
void chord_point_t(const Vec2& x, const T& yx, const T& yy, const T& t, T& px, T& py) {
  T dx = yx - x.x, dy = yy - x.y;
  T L = sqrt(dx * dx + dy * dy);
  T ux = dx / L, uy = dy / L;
  T b = x.x * ux + x.y * uy;
  T disc = sqrt(b * b - (norm2(x) - 1.0));
  T s_lo = (-1.0) * b - disc;
  T s_hi = (-1.0) * b + disc;
  T Q0 = (-1.0) * s_lo / s_hi;
  T Q1 = (L - s_lo) / (s_hi - L);
  T kappa = log(Q1 / Q0);
  T Q = Q0 * exp(kappa * t);
  T s = (s_lo + Q * s_hi) / (1.0 + Q);
  px = x.x + s * ux;
  py = x.y + s * uy;
}

struct ChartJacobian {
  Vec2 pos;
  Vec2 dbeta;  // d phi / d beta_y
  Vec2 dt;     // d phi / d t
};

// analytic chart Jacobian of phi when the whole curve is the g0 chord
ChartJacobian chord_chart_jacobian(const Vec2& x, double R, double beta, double t) {
  ChartJacobian out;
  {
    Jet<double> yb(beta, 1.0);
    Jet<double> yx = R * cos(yb), yy = R * sin(yb);
    Jet<double> tt(t, 0.0);
    Jet<double> px, py;
    chord_point_t(x, yx, yy, tt, px, py);
    out.pos = {px.a, py.a};
    out.dbeta = {px.b, py.b};
  }
  {
    Jet<double> yx(R * std::cos(beta), 0.0), yy(R * std::sin(beta), 0.0);
    Jet<double> tt(t, 1.0);
    Jet<double> px, py;
    chord_point_t(x, yx, yy, tt, px, py);
    out.dt = {px.b, py.b};
  }
  return out;
}

}  // namespace

CurveFamily::CurveFamily(const ConformalMetric& cm, double newton_tol)
    : cm_(&cm), engine_(cm), newton_tol_(newton_tol) {}

GeodesicState CurveFamily::phi_state(const Vec2& x, const Vec2& y, double t,
                                     const TangentVector* shoot_seed,
                                     TangentVector* shoot_out) const {
  const double r = rho(t);
  const GeodesicState chord = klein_chord_state(x, y, t);
  if (r == 0.0) {
    if (shoot_out) *shoot_out = klein_chord_state(x, y, 0.0).velocity;
    return chord;
  }
  const double rp = rho_d1(t);
  const GeodesicState warped = engine_.g_point_state(x, y, t, shoot_seed, shoot_out);
  GeodesicState out;
  out.position = (1.0 - r) * chord.position + r * warped.position;
  out.velocity = (1.0 - r) * chord.velocity + r * warped.velocity +
                 rp * (warped.position - chord.position);
  return out;
}

Vec2 CurveFamily::phi(const BoundaryAngle& x, const BoundaryAngle& y, double t) const {
  return phi_state(x.point(), y.point(), t).position;
}

TangentVector CurveFamily::phi_velocity(const BoundaryAngle& x, const BoundaryAngle& y,
                                        double t) const {
  return phi_state(x.point(), y.point(), t).velocity;
}

void CurveFamily::seed_from_chord(const Vec2& x, const DiskPoint& p, double& beta,
                                  double& t) const {
  const Vec2 d = p - x;
  const double s = -2.0 * dot(x, d) / norm2(d);
  const Vec2 y0 = x + s * d;
  beta = std::atan2(y0.y, y0.x);
  const double dxp = hyp_distance(x, p);
  const double dxy = hyp_distance(x, y0);
  t = dxp / dxy;
}

SigmaSolution CurveFamily::sigma_newton(const BoundaryAngle& x, const DiskPoint& p, double beta0,
                                        double t0, SigmaScratch* scratch) const {
  const Vec2 xp = x.point();
  const double R = x.radius;
  double beta = beta0, t = t0;
  TangentVector shoot{};
  bool have_shoot = scratch && scratch->valid && scratch->shoot_valid;
  if (have_shoot) shoot = scratch->shoot;

  SigmaSolution sol;
  double prev_res = 1e300;
  for (int it = 0; it < 60; ++it) {
    const Vec2 y = {R * std::cos(beta), R * std::sin(beta)};
    const double w_rho = rho(t);
    const bool cf = w_rho == 0.0 || engine_.chord_exact(xp, y);
    Vec2 pos, c1, c2;
    double shoot_res = 0.0;
    if (cf) {
      const ChartJacobian cj = chord_chart_jacobian(xp, R, beta, t);
      pos = cj.pos;
      c1 = cj.dbeta;
      c2 = cj.dt;
      have_shoot = false;  // chord branch invalidates the tracked velocity
    } else {
      // Barycenter of the chord and the warped geodesic. The shooting
      // velocity is tracked across iterations and corrected to first order
      // from the variational Jacobians, so each Newton iteration costs a
      // single augmented flow once warm.
      GPointVariation gv;
      if (!have_shoot) {
        gv = engine_.g_point_variation(xp, y, t, nullptr);
        shoot = gv.shoot;
        have_shoot = true;
      } else {
        engine_.flow_with_variation(xp, shoot, t, 1.0, gv);
      }
      const Vec2 r1 = gv.pos_1 - y;
      shoot_res = norm(r1);
      const Vec2 dw = -1.0 * (inverse(gv.dpos_dw_1) * r1);
      // first-order transport of the waypoint state to the corrected velocity
      gv.pos_t += gv.dpos_dw_t * dw;
      gv.vel_t += gv.dvel_dw_t * dw;
      shoot += dw;

      const double rp = rho_d1(t);
      const ChartJacobian cj = chord_chart_jacobian(xp, R, beta, t);
      pos = (1.0 - w_rho) * cj.pos + w_rho * gv.pos_t;
      c2 = (1.0 - w_rho) * cj.dt + w_rho * gv.vel_t + rp * (gv.pos_t - cj.pos);
      const Vec2 yprime = {-R * std::sin(beta), R * std::cos(beta)};
      const Vec2 dw_dbeta = inverse(gv.dpos_dw_1) * yprime;
      const Vec2 dwarp_dbeta = gv.dpos_dw_t * dw_dbeta;
      c1 = (1.0 - w_rho) * cj.dbeta + w_rho * dwarp_dbeta;
    }
    const Vec2 r = pos - p;
    const double res = norm(r);
    const bool stalled = it > 8 && res < 3.0 * newton_tol_ && res > 0.3 * prev_res;
    const bool shoot_ok = cf || shoot_res < 100.0 * newton_tol_;
    if (shoot_ok && (res < newton_tol_ || stalled)) {
      sol.beta_y = wrap_angle(beta);
      sol.t = t;
      sol.velocity = c2;
      sol.dphi_dbeta = c1;
      const Mat2 Ainv = inverse(from_columns(c1, c2));
      sol.grad_angle = Ainv.row(0);
      sol.grad_t = Ainv.row(1);
      sol.residual = res;
      sol.iterations = it;
      sol.closed_form = cf;
      if (scratch) {
        scratch->valid = true;
        scratch->beta_y = beta;
        scratch->t = t;
        scratch->shoot = shoot;
        scratch->shoot_valid = have_shoot;
      }
      return sol;
    }
    const Mat2 A = from_columns(c1, c2);
    Vec2 step = inverse(A) * r;
    step = -1.0 * step;
    // damping and the (0,1) window for p in D
    double db = std::clamp(step.x, -0.5, 0.5);
    double dt = std::clamp(step.y, -0.2, 0.2);
    if (res > prev_res && it > 0) {
      db *= 0.5;
      dt *= 0.5;
    }
    beta += db;
    t = std::clamp(t + dt, 1e-6, 1.0 - 1e-6);
    prev_res = res;
  }
  throw std::runtime_error("sigma: Newton did not converge");
}

SigmaSolution CurveFamily::sigma_full(const BoundaryAngle& x, const DiskPoint& p,
                                      SigmaScratch* scratch) const {
  const Vec2 xp = x.point();
  if (std::abs(dot(xp, p - xp)) < 1e-14)
    throw std::domain_error("sigma: (x, p) is tangential, outside N");
  double beta, t;
  if (scratch && scratch->valid) {
    beta = scratch->beta_y;
    t = scratch->t;
  } else {
    seed_from_chord(xp, p, beta, t);
  }
  try {
    return sigma_newton(x, p, beta, t, scratch);
  } catch (const std::runtime_error&) {
    if (scratch && scratch->valid) {
      // retry cold from the chord seed
      scratch->valid = false;
      seed_from_chord(xp, p, beta, t);
      return sigma_newton(x, p, beta, t, scratch);
    }
    throw;
  }
}

EndpointSolve CurveFamily::sigma(const BoundaryAngle& x, const DiskPoint& p) const {
  const SigmaSolution sol = sigma_full(x, p);
  EndpointSolve out;
  out.y = BoundaryAngle(sol.beta_y, x.radius);
  out.t = sol.t;
  out.residual = sol.residual;
  out.newton_iterations = sol.iterations;
  return out;
}

Mat2 CurveFamily::sigma_jacobian(const BoundaryAngle& x, const DiskPoint& p) const {
  const SigmaSolution sol = sigma_full(x, p);
  const BoundaryAngle y(sol.beta_y, x.radius);
  // embedded point moves along the circle tangent at rate R per unit angle
  return outer(x.radius * y.tangent(), sol.grad_angle);
}

ChordSolve CurveFamily::solve_chord(const DiskPoint& p, const DiskPoint& q) const {
  if (norm(p - q) < 1e-10)
    throw std::invalid_argument("solve_chord: points coincide");
  const double R = cm_->R();
  const Vec2 dir = (q - p) / norm(q - p);
  const double b = dot(p, dir);
  const double disc = std::sqrt(std::max(b * b + R * R - norm2(p), 0.0));

  auto run = [&](double beta_seed) -> ChordSolve {
    SigmaScratch sp, sq;
    double beta = beta_seed;
    double g_prev = 0.0;
    for (int it = 0; it < 60; ++it) {
      BoundaryAngle x(beta, R);
      const SigmaSolution a = sigma_full(x, p, &sp);
      const SigmaSolution c = sigma_full(x, q, &sq);
      const double g = angle_diff(a.beta_y, c.beta_y);
      if (std::abs(g) < 1e-10) {
        ChordSolve out;
        out.x = x;
        out.y = BoundaryAngle(a.beta_y, R);
        out.t0 = a.t;
        out.t1 = c.t;
        return out;
      }
      const double h = 1e-6;
      SigmaScratch sp2 = sp, sq2 = sq;
      const SigmaSolution a2 = sigma_full(BoundaryAngle(beta + h, R), p, &sp2);
      const SigmaSolution c2 = sigma_full(BoundaryAngle(beta + h, R), q, &sq2);
      const double g2 = angle_diff(a2.beta_y, c2.beta_y);
      const double dg = (g2 - g) / h;
      double step = -g / dg;
      step = std::clamp(step, -0.5, 0.5);
      if (it > 0 && std::abs(g) > std::abs(g_prev)) step *= 0.5;
      beta += step;
      g_prev = g;
    }
    throw std::runtime_error("solve_chord: root find did not converge");
  };

  // seed behind p: curve runs x -> p -> q so t0 < t1
  const Vec2 xm = p + (-b - disc) * dir;
  ChordSolve out = run(std::atan2(xm.y, xm.x));
  if (out.t0 >= out.t1) {
    const Vec2 xq = p + (-b + disc) * dir;
    out = run(std::atan2(xq.y, xq.x));
    if (out.t0 >= out.t1) throw std::runtime_error("solve_chord: could not order parameters");
  }
  return out;
}

DirectedCurveSolve CurveFamily::solve_direction(const DiskPoint& p, const TangentVector& v) const {
  if (norm(v) == 0.0) throw std::invalid_argument("solve_direction: zero vector");
  const double R = cm_->R();
  const Vec2 dir = v / norm(v);
  const double b = dot(p, dir);
  const double disc = std::sqrt(std::max(b * b + R * R - norm2(p), 0.0));

  auto run = [&](double beta_seed, double& beta_out) -> SigmaSolution {
    SigmaScratch sc;
    double beta = beta_seed;
    double g_prev = 0.0;
    for (int it = 0; it < 60; ++it) {
      const SigmaSolution sol = sigma_full(BoundaryAngle(beta, R), p, &sc);
      const double g = cross(dir, sol.velocity) / norm(sol.velocity);
      if (std::abs(g) < 1e-10) {
        beta_out = beta;
        return sol;
      }
      const double h = 1e-6;
      SigmaScratch sc2 = sc;
      const SigmaSolution s2 = sigma_full(BoundaryAngle(beta + h, R), p, &sc2);
      const double g2 = cross(dir, s2.velocity) / norm(s2.velocity);
      const double dg = (g2 - g) / h;
      double step = -g / dg;
      step = std::clamp(step, -0.5, 0.5);
      if (it > 0 && std::abs(g) > std::abs(g_prev)) step *= 0.5;
      beta += step;
      g_prev = g;
    }
    throw std::runtime_error("solve_direction: root find did not converge");
  };

  // seed at the backward intersection of p + R v with the circle
  const Vec2 xm = p + (-b - disc) * dir;
  double beta_x = 0.0;
  SigmaSolution sol = run(std::atan2(xm.y, xm.x), beta_x);
  if (dot(sol.velocity, v) < 0.0) {
    // landed on e^+; the other root is the forward intersection
    const Vec2 xq = p + (-b + disc) * dir;
    sol = run(std::atan2(xq.y, xq.x), beta_x);
    if (dot(sol.velocity, v) < 0.0)
      throw std::runtime_error("solve_direction: orientation check failed");
  }
  DirectedCurveSolve out;
  out.chart.x = BoundaryAngle(beta_x, R);
  out.chart.y = BoundaryAngle(sol.beta_y, R);
  out.chart.t = sol.t;
  out.e_minus = out.chart.x;
  out.e_plus = out.chart.y;
  return out;
}

InjectivityReport CurveFamily::injectivity_probe(int samples, std::uint64_t seed,
                                                 double ratio_floor) const {
  SplitMix64 rng(seed);
  const double R = cm_->R();
  std::vector<double> xs(samples), ys(samples), ts(samples);
  std::vector<Vec2> imgs(samples);
  for (int i = 0; i < samples; ++i) {
    double bx, by;
    do {
      bx = rng.uniform(0.0, 2.0 * M_PI);
      by = rng.uniform(0.0, 2.0 * M_PI);
    } while (std::abs(angle_diff(bx, by)) < 1e-2);
    const double t = rng.uniform(0.25, 0.75);
    xs[i] = bx;
    ys[i] = by;
    ts[i] = t;
    imgs[i] = phi(BoundaryAngle(bx, R), BoundaryAngle(by, R), t);
  }
  InjectivityReport rep;
  rep.samples = samples;
  rep.ratio_floor = ratio_floor;
  rep.min_separation_ratio = 1e300;
  const double coarse_floor = 1e-3;
  for (int i = 0; i < samples; ++i) {
    for (int j = i + 1; j < samples; ++j) {
      const double dxa = angle_diff(xs[i], xs[j]);
      const double dya = angle_diff(ys[i], ys[j]);
      const double dt = ts[i] - ts[j];
      const double chart_d = std::sqrt(dxa * dxa + dya * dya + dt * dt);
      if (chart_d <= coarse_floor) continue;
      const double img_d = std::sqrt(dxa * dxa + norm2(imgs[i] - imgs[j]));
      ++rep.pairs_checked;
      rep.min_separation_ratio = std::min(rep.min_separation_ratio, img_d / chart_d);
    }
  }
  rep.pass = rep.min_separation_ratio > ratio_floor;
  return rep;
}

}  // namespace finsler
