#include "finsler/finsler_metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "finsler/ode.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// radial table

class RadialTable {
 public:
  RadialTable(const FinslerHandle& h, int n_radii) {
    r_max_ = h.R0();
    n_ = n_radii;
    rows_.reserve(n_);
    for (int i = 0; i < n_; ++i) {
      const double r = r_max_ * i / (n_ - 1.0);
      BoundaryData bd = h.boundary_data({r, 0.0});
      Row row;
      row.m = bd.m;
      row.hx = bd.hx;
      row.hy = bd.hy;
      kmax_ = std::max(kmax_, std::max(row.m.harmonics(),
                                       std::max(row.hx.harmonics(), row.hy.harmonics())));
      rows_.push_back(std::move(row));
    }
    for (Row& row : rows_) {
      pad(row.m);
      pad(row.hx);
      pad(row.hy);
    }
  }

  // boundary data at p from radial interpolation plus the rotation phase
  BoundaryData query(const Vec2& p) const {
    const double r = norm(p);
    const double theta = std::atan2(p.y, p.x);
    const double x = r / r_max_ * (n_ - 1.0);
    int i1 = std::clamp(static_cast<int>(x), 0, n_ - 2);
    const double u = x - i1;
    const int i0 = std::max(i1 - 1, 0), i2 = i1 + 1, i3 = std::min(i1 + 2, n_ - 1);

    // Catmull-Rom weights
    const double u2 = u * u, u3 = u2 * u;
    const double w0 = 0.5 * (-u3 + 2 * u2 - u);
    const double w1 = 0.5 * (3 * u3 - 5 * u2 + 2);
    const double w2 = 0.5 * (-3 * u3 + 4 * u2 + u);
    const double w3 = 0.5 * (u3 - u2);

    BoundaryData bd;
    bd.p = p;
    bd.m = blend_rotate_scalar(i0, i1, i2, i3, w0, w1, w2, w3, theta, &Row::m);
    FourierSeries hx0 = blend_rotate_scalar(i0, i1, i2, i3, w0, w1, w2, w3, theta, &Row::hx);
    FourierSeries hy0 = blend_rotate_scalar(i0, i1, i2, i3, w0, w1, w2, w3, theta, &Row::hy);
    // rotate the vector components: h_p = Rot(theta) h_r(. - theta)
    const double c = std::cos(theta), s = std::sin(theta);
    bd.hx = combine(hx0, hy0, c, -s);
    bd.hy = combine(hx0, hy0, s, c);
    // samples for kink bracketing
    const int ns = 64;
    bd.m_raw.resize(ns);
    bd.hx_raw.resize(ns);
    bd.hy_raw.resize(ns);
    for (int j = 0; j < ns; ++j) {
      const double beta = 2.0 * M_PI * j / ns;
      bd.m_raw[j] = bd.m.eval(beta);
      bd.hx_raw[j] = bd.hx.eval(beta);
      bd.hy_raw[j] = bd.hy.eval(beta);
    }
    return bd;
  }

 private:
  struct Row {
    FourierSeries m, hx, hy;
  };

  void pad(FourierSeries& f) const {
    f.a.resize(kmax_ + 1, 0.0);
    f.b.resize(kmax_ + 1, 0.0);
  }

  template <class Member>
  FourierSeries blend_rotate_scalar(int i0, int i1, int i2, int i3, double w0, double w1,
                                    double w2, double w3, double theta, Member mem) const {
    FourierSeries out;
    out.a.assign(kmax_ + 1, 0.0);
    out.b.assign(kmax_ + 1, 0.0);
    for (int k = 0; k <= kmax_; ++k) {
      const double ak = w0 * (rows_[i0].*mem).a[k] + w1 * (rows_[i1].*mem).a[k] +
                        w2 * (rows_[i2].*mem).a[k] + w3 * (rows_[i3].*mem).a[k];
      const double bk = w0 * (rows_[i0].*mem).b[k] + w1 * (rows_[i1].*mem).b[k] +
                        w2 * (rows_[i2].*mem).b[k] + w3 * (rows_[i3].*mem).b[k];
      // shifted series f(beta - theta)
      const double ck = std::cos(k * theta), sk = std::sin(k * theta);
      out.a[k] = ak * ck - bk * sk;
      out.b[k] = ak * sk + bk * ck;
    }
    return out;
  }

  static FourierSeries combine(const FourierSeries& f, const FourierSeries& g, double cf,
                               double cg) {
    FourierSeries out;
    const size_t n = f.a.size();
    out.a.resize(n);
    out.b.resize(n);
    for (size_t k = 0; k < n; ++k) {
      out.a[k] = cf * f.a[k] + cg * g.a[k];
      out.b[k] = cf * f.b[k] + cg * g.b[k];
    }
    return out;
  }

  double r_max_;
  int n_ = 0;
  int kmax_ = 0;
  std::vector<Row> rows_;
};

// ---------------------------------------------------------------------------

FinslerHandle::FinslerHandle(std::shared_ptr<const CurveFamily> family, int quad_nodes, double R0,
                             ToleranceConfig tol, int bd_samples)
    : family_(std::move(family)),
      quad_nodes_(quad_nodes),
      R0_(R0),
      tol_(tol),
      bd_samples_(bd_samples) {
  const double R = family_->R();
  if (R0_ <= 0.0) R0_ = 0.95 * R;
  if (!(R0_ > R / 2.0 && R0_ < R))
    throw std::invalid_argument("R0 must lie in (R/2, R)");
  if (quad_nodes_ < 32) throw std::invalid_argument("quad_nodes must be >= 32");
}

FinslerHandle::~FinslerHandle() = default;

BoundaryData FinslerHandle::boundary_data(const DiskPoint& p) const {
  const double R = family_->R();
  int n = bd_samples_;
  for (int attempt = 0; attempt < 5; ++attempt) {
    BoundaryData bd;
    bd.p = p;
    bd.m_raw.resize(n);
    bd.hx_raw.resize(n);
    bd.hy_raw.resize(n);
    SigmaScratch scratch;
    double prev_by = 0.0, prev_t = 0.0;
    bool have_prev = false;
    for (int k = 0; k < n; ++k) {
      const double beta = 2.0 * M_PI * k / n;
      const BoundaryAngle x(beta, R);
      if (have_prev && scratch.valid) {
        // linear extrapolation of the chart along the sweep
        const double step_by = angle_diff(scratch.beta_y, prev_by);
        const double step_t = scratch.t - prev_t;
        prev_by = scratch.beta_y;
        prev_t = scratch.t;
        scratch.beta_y += step_by;
        scratch.t = std::clamp(scratch.t + step_t, 1e-6, 1.0 - 1e-6);
      } else if (scratch.valid) {
        prev_by = scratch.beta_y;
        prev_t = scratch.t;
        have_prev = true;
      }
      const SigmaSolution sol = family_->sigma_full(x, p, &scratch);
      bd.m_raw[k] =
          boundary_distance_mixed_derivative(x, BoundaryAngle(sol.beta_y, R));
      bd.hx_raw[k] = sol.grad_angle.x;
      bd.hy_raw[k] = sol.grad_angle.y;
    }
    // truncation at the end-point solver noise floor keeps the series free
    // of spurious high harmonics
    bd.m = FourierSeries::fit(bd.m_raw, 3e-12);
    bd.hx = FourierSeries::fit(bd.hx_raw, 3e-12);
    bd.hy = FourierSeries::fit(bd.hy_raw, 3e-12);
    const double tail = std::max({FourierSeries::tail_fraction(bd.m_raw),
                                  FourierSeries::tail_fraction(bd.hx_raw),
                                  FourierSeries::tail_fraction(bd.hy_raw)});
    if (tail < 1e-8 || n >= 2048 || attempt == 4) return bd;
    n *= 2;  // spectrum not resolved at this sampling: refine
  }
  throw std::logic_error("unreachable");
}

FinslerHandle::ArcSplit FinslerHandle::find_kinks(const BoundaryData& bd,
                                                  const TangentVector& v) const {
  const int n = static_cast<int>(bd.m_raw.size());
  std::vector<double> roots;
  auto g = [&](double beta) { return bd.hx.eval(beta) * v.x + bd.hy.eval(beta) * v.y; };
  for (int k = 0; k < n; ++k) {
    const double b0 = 2.0 * M_PI * k / n;
    const double b1 = 2.0 * M_PI * (k + 1) / n;
    const double g0 = bd.hx_raw[k] * v.x + bd.hy_raw[k] * v.y;
    const double g1 = (k + 1 < n ? bd.hx_raw[k + 1] * v.x + bd.hy_raw[k + 1] * v.y
                                 : bd.hx_raw[0] * v.x + bd.hy_raw[0] * v.y);
    if (g0 == 0.0) {
      roots.push_back(b0);
      continue;
    }
    if (g0 * g1 < 0.0) {
      double lo = b0, hi = b1, flo = g0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if (flo * fm <= 0.0)
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
  }
  if (roots.size() != 2)
    throw std::runtime_error("integrand kink structure invalid (" +
                             std::to_string(roots.size()) +
                             " sign changes); lambda may be outside the valid range");
  return {roots[0], roots[1]};
}

double FinslerHandle::arc_integral(const BoundaryData& bd, const TangentVector& v, double b1,
                                   double b2) const {
  auto f = [&](double beta) {
    return bd.m.eval(beta) * std::abs(bd.hx.eval(beta) * v.x + bd.hy.eval(beta) * v.y);
  };
  // adaptive bisection of Gauss-Legendre panels, capped by quad_nodes per arc
  int n = 32;
  double prev = gl_integrate(f, b1, b2, n);
  while (2 * n <= quad_nodes_) {
    n *= 2;
    const double cur = gl_integrate(f, b1, b2, n);
    if (std::abs(cur - prev) <= tol_.quad_rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

double FinslerHandle::eval_with_data(const BoundaryData& bd, const TangentVector& v) const {
  if (v.x == 0.0 && v.y == 0.0) return 0.0;
  const ArcSplit arcs = find_kinks(bd, v);
  const double i1 = arc_integral(bd, v, arcs.beta1, arcs.beta2);
  const double i2 = arc_integral(bd, v, arcs.beta2, arcs.beta1 + 2.0 * M_PI);
  return 0.25 * (i1 + i2);
}

double FinslerHandle::finsler_eval(const DiskPoint& p, const TangentVector& v) const {
  if (v.x == 0.0 && v.y == 0.0) return 0.0;
  if (fall_through(p)) return klein_norm(p, v);
  if (table_mode_ && table_) return eval_with_data(table_->query(p), v);
  return eval_with_data(boundary_data(p), v);
}

Vec2 FinslerHandle::arc_integral_vec(const BoundaryData& bd, double b1, double b2,
                                     double sign) const {
  auto fx = [&](double beta) { return bd.m.eval(beta) * bd.hx.eval(beta); };
  auto fy = [&](double beta) { return bd.m.eval(beta) * bd.hy.eval(beta); };
  const int n = std::min(quad_nodes_, 128);
  return {sign * gl_integrate(fx, b1, b2, n), sign * gl_integrate(fy, b1, b2, n)};
}

Vec2 FinslerHandle::grad_v_with_data(const BoundaryData& bd, const TangentVector& v) const {
  const ArcSplit arcs = find_kinks(bd, v);
  const double mid1 = 0.5 * (arcs.beta1 + arcs.beta2);
  const double s1 =
      (bd.hx.eval(mid1) * v.x + bd.hy.eval(mid1) * v.y) > 0.0 ? 1.0 : -1.0;
  const Vec2 g1 = arc_integral_vec(bd, arcs.beta1, arcs.beta2, s1);
  const Vec2 g2 = arc_integral_vec(bd, arcs.beta2, arcs.beta1 + 2.0 * M_PI, -s1);
  return 0.25 * (g1 + g2);
}

HessianReport FinslerHandle::hessian_with_data(const BoundaryData& bd,
                                               const TangentVector& v) const {
  const double F = eval_with_data(bd, v);
  const Vec2 grad = grad_v_with_data(bd, v);
  const ArcSplit arcs = find_kinks(bd, v);
  Mat2 hess_F{0, 0, 0, 0};
  for (double bstar : {arcs.beta1, arcs.beta2}) {
    const Vec2 hs = bd.h(bstar);
    const Vec2 hp = bd.h_deriv(bstar);
    const double den = std::abs(dot(hp, v));
    if (den < 1e-12)
      throw std::runtime_error("v_hessian: degenerate kink crossing");
    const double mstar = bd.m.eval(bstar);
    hess_F = hess_F + outer(hs, hs) * (0.5 * mstar / den);
  }
  HessianReport rep;
  rep.point = bd.p;
  rep.direction = v;
  rep.hessian = hess_F * (2.0 * F) + outer(grad, grad) * 2.0;
  sym_eigenvalues(rep.hessian.a, 0.5 * (rep.hessian.b + rep.hessian.c), rep.hessian.d,
                  rep.eigen_min, rep.eigen_max);
  return rep;
}

HessianReport FinslerHandle::v_hessian(const DiskPoint& p, const TangentVector& v) const {
  if (v.x == 0.0 && v.y == 0.0)
    throw std::invalid_argument("v_hessian: direction must be nonzero");
  if (fall_through(p)) {
    // F^2 is the exact quadratic form of g0 here
    const MetricTensor2 g = g0_tensor(p);
    HessianReport rep;
    rep.point = p;
    rep.direction = v;
    rep.hessian = Mat2{2.0 * g.g11, 2.0 * g.g12, 2.0 * g.g12, 2.0 * g.g22};
    sym_eigenvalues(rep.hessian.a, rep.hessian.b, rep.hessian.d, rep.eigen_min, rep.eigen_max);
    return rep;
  }
  if (table_mode_ && table_) return hessian_with_data(table_->query(p), v);
  return hessian_with_data(boundary_data(p), v);
}

double FinslerHandle::dual_norm_with_data(const BoundaryData& bd, const TangentVector& cov,
                                          double* angle_hint) const {
  auto ratio = [&](double theta) {
    const Vec2 v{std::cos(theta), std::sin(theta)};
    const double F = eval_with_data(bd, v);
    return (cov.x * v.x + cov.y * v.y) / F;
  };
  double lo, hi;
  if (angle_hint && std::isfinite(*angle_hint)) {
    const double w = 0.35;
    lo = *angle_hint - w;
    hi = *angle_hint + w;
    // hint must bracket a local max; otherwise fall back to a scan
    const double rm = ratio(0.5 * (lo + hi));
    if (!(rm >= ratio(lo) && rm >= ratio(hi))) angle_hint = nullptr;
  }
  if (!angle_hint || !std::isfinite(*angle_hint)) {
    const int M = 48;
    double best = -1e300;
    double best_th = 0.0;
    for (int k = 0; k < M; ++k) {
      const double th = 2.0 * M_PI * k / M;
      const double r = ratio(th);
      if (r > best) {
        best = r;
        best_th = th;
      }
    }
    lo = best_th - 2.0 * M_PI / M;
    hi = best_th + 2.0 * M_PI / M;
  }
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = ratio(c), fd = ratio(d);
  while (hi - lo > 1e-8) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = ratio(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = ratio(d);
    }
  }
  const double th = 0.5 * (lo + hi);
  if (angle_hint) *angle_hint = th;
  return ratio(th);
}

double FinslerHandle::dual_norm(const DiskPoint& p, const TangentVector& cov,
                                double* angle_hint) const {
  if (fall_through(p)) {
    // closed-form dual of the Riemannian norm: |cov|_{g0^{-1}}
    const double dsc = 1.0 - norm2(p);
    const Vec2 gic{dsc * ((1.0 - p.x * p.x) * cov.x - p.x * p.y * cov.y),
                   dsc * (-p.x * p.y * cov.x + (1.0 - p.y * p.y) * cov.y)};
    return std::sqrt(dot(cov, gic));
  }
  if (table_mode_ && table_) return dual_norm_with_data(table_->query(p), cov, angle_hint);
  return dual_norm_with_data(boundary_data(p), cov, angle_hint);
}

double FinslerHandle::finsler_length(const std::function<GeodesicState(double)>& curve, double a,
                                     double b) const {
  auto speed = [&](double t) {
    const GeodesicState st = curve(t);
    return finsler_eval(st.position, st.velocity);
  };
  return adaptive_gl(speed, a, b, 1e-8, 16, 12);
}

double FinslerHandle::finsler_length(const std::vector<double>& params,
                                     const std::vector<Vec2>& points) const {
  if (params.size() != points.size() || params.size() < 2)
    throw std::invalid_argument("finsler_length: need >= 2 sampled nodes");
  bool degenerate = true;
  for (size_t i = 1; i < points.size(); ++i)
    if (norm(points[i] - points[0]) > 0.0) degenerate = false;
  if (degenerate) throw std::invalid_argument("finsler_length: degenerate curve");

  // Catmull-Rom through the samples, then panel quadrature
  const int n = static_cast<int>(points.size());
  auto state_at = [&](double t) -> GeodesicState {
    int i = 0;
    while (i + 2 < n && params[i + 1] < t) ++i;
    const int i0 = std::max(i - 1, 0), i3 = std::min(i + 2, n - 1);
    const double h = params[i + 1] - params[i];
    const double u = (t - params[i]) / h;
    const Vec2 p0 = points[i0], p1 = points[i], p2 = points[i + 1], p3 = points[i3];
    const Vec2 m1 = (i == 0) ? (p2 - p1) : (p2 - p0) * (h / (params[i + 1] - params[i0]));
    const Vec2 m2 =
        (i + 2 >= n) ? (p2 - p1) : (p3 - p1) * (h / (params[i3] - params[i]));
    const double u2 = u * u, u3 = u2 * u;
    GeodesicState st;
    st.position = (2 * u3 - 3 * u2 + 1) * p1 + (u3 - 2 * u2 + u) * m1 +
                  (-2 * u3 + 3 * u2) * p2 + (u3 - u2) * m2;
    st.velocity = ((6 * u2 - 6 * u) * p1 + (3 * u2 - 4 * u + 1) * m1 +
                   (-6 * u2 + 6 * u) * p2 + (3 * u2 - 2 * u) * m2) / h;
    return st;
  };
  return finsler_length(state_at, params.front(), params.back());
}

double FinslerHandle::finsler_distance(const DiskPoint& p, const DiskPoint& q) const {
  if (norm(p - q) == 0.0) return 0.0;
  const ChordSolve chord = family_->solve_chord(p, q);
  const Vec2 x = chord.x.point(), y = chord.y.point();
  TangentVector shoot{};
  bool have = false;
  auto curve = [&](double t) -> GeodesicState {
    GeodesicState st = family_->phi_state(x, y, t, have ? &shoot : nullptr, &shoot);
    have = true;
    return st;
  };
  return finsler_length(curve, chord.t0, chord.t1);
}

// ---------------------------------------------------------------------------
// conjugate scan

void FinslerHandle::el_acceleration(const DiskPoint& q, const TangentVector& v, Vec2& acc) const {
  // a thin band inside R0 still has F = F0 exactly (the equality region of
  // the construction extends past R0); keeps the finite differences off the
  // evaluation-branch seam
  if (norm(q) >= R0_ - 1e-4) {
    // EL flow of F0^2/2 is the g0-geodesic flow
    const double d = 1.0 - norm2(q);
    const double fac = 2.0 * dot(q, v) / d;
    acc = {-fac * v.x, -fac * v.y};
    return;
  }
  if (!table_) throw std::logic_error("conjugate_scan requires the radial table");
  const double delta = 1e-6;
  auto L = [&](const Vec2& qq) {
    const double F = eval_table(qq, v);
    return 0.5 * F * F;
  };
  const Vec2 dLdq{(L({q.x + delta, q.y}) - L({q.x - delta, q.y})) / (2 * delta),
                  (L({q.x, q.y + delta}) - L({q.x, q.y - delta})) / (2 * delta)};

  const double vn = norm(v);
  const Vec2 dq = v * (delta / vn);
  auto gradvL = [&](const Vec2& qq) {
    const BoundaryData bd = table_->query(qq);
    const double F = eval_with_data(bd, v);
    return grad_v_with_data(bd, v) * F;
  };
  const Vec2 mixed = (gradvL(q + dq) - gradvL(q - dq)) * (vn / (2 * delta));

  const BoundaryData bd = table_->query(q);
  const HessianReport hr = hessian_with_data(bd, v);
  if (hr.eigen_min < 1e-8)
    throw std::runtime_error("conjugate_scan: Hessian nearly singular along the flow");
  const Mat2 Hinv = inverse(hr.hessian * 0.5);
  acc = Hinv * (dLdq - mixed);
}

ConjugateScanReport FinslerHandle::conjugate_scan(const DiskPoint& p, const TangentVector& v,
                                                  double horizon, int steps) const {
  if (v.x == 0.0 && v.y == 0.0)
    throw std::invalid_argument("conjugate_scan: zero initial direction");
  if (!table_) build_radial_table();
  const double eps = 1e-6;
  // three trajectories in lockstep: base plus two vertically perturbed copies
  std::array<double, 12> z{p.x, p.y, v.x, v.y,
                           p.x, p.y, v.x + eps, v.y,
                           p.x, p.y, v.x, v.y + eps};

  auto rhs = [&](double, const std::array<double, 12>& s, std::array<double, 12>& ds) {
    for (int blk = 0; blk < 3; ++blk) {
      const Vec2 q{s[4 * blk], s[4 * blk + 1]};
      const Vec2 vel{s[4 * blk + 2], s[4 * blk + 3]};
      Vec2 acc;
      el_acceleration(q, vel, acc);
      ds[4 * blk] = vel.x;
      ds[4 * blk + 1] = vel.y;
      ds[4 * blk + 2] = acc.x;
      ds[4 * blk + 3] = acc.y;
    }
  };

  ConjugateScanReport rep;
  rep.checkpoints = steps;
  rep.min_abs_det = 1e300;
  const double F0 = eval_table(p, v);

  OdeOptions opt;
  opt.rel_tol = 1e-9;
  opt.abs_tol = 1e-9;
  opt.max_steps = 2000000;

  double prev_det = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double t0 = horizon * (k - 1) / steps;
    const double t1 = horizon * k / steps;
    static const std::function<bool(const std::array<double, 12>&)> ok =
        [](const std::array<double, 12>& s) {
          for (int b = 0; b < 3; ++b)
            if (s[4 * b] * s[4 * b] + s[4 * b + 1] * s[4 * b + 1] >= 1.0) return false;
          return true;
        };
    dp54_integrate_n<12>(rhs, z, t0, t1, opt, ok);
    const Vec2 dq1{(z[4] - z[0]) / eps, (z[5] - z[1]) / eps};
    const Vec2 dq2{(z[8] - z[0]) / eps, (z[9] - z[1]) / eps};
    const double det = cross(dq1, dq2);
    if (k >= 2 && det * prev_det < 0.0) {
      rep.sign_change = true;
      if (rep.first_change_t < 0.0) rep.first_change_t = t1;
    }
    if (k >= 2) rep.min_abs_det = std::min(rep.min_abs_det, std::abs(det));
    prev_det = det;
    const double Fk = eval_table({z[0], z[1]}, {z[2], z[3]});
    rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(Fk - F0) / F0);
  }
  return rep;
}

void FinslerHandle::build_radial_table(int n_radii) const {
  table_ = std::make_unique<RadialTable>(*this, n_radii);
}

bool FinslerHandle::has_radial_table() const { return table_ != nullptr; }

double FinslerHandle::eval_table(const DiskPoint& p, const TangentVector& v) const {
  if (fall_through(p)) return klein_norm(p, v);
  if (!table_) throw std::logic_error("radial table not built");
  return eval_with_data(table_->query(p), v);
}

BoundaryData FinslerHandle::boundary_data_table(const DiskPoint& p) const {
  if (!table_) throw std::logic_error("radial table not built");
  return table_->query(p);
}

}  // namespace finsler
