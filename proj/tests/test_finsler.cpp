#include <doctest.h>

#include <cmath>
#include <memory>

#include "finsler/finsler_metric.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/rng.hpp"

using namespace finsler;

namespace {

struct Handles {
  std::shared_ptr<const RadialEigenfunction> eigen;
  std::shared_ptr<const ConformalMetric> keep0, keep;
  std::shared_ptr<const CurveFamily> fam0, fam;
  std::shared_ptr<FinslerHandle> h0, h;

  Handles() {
    eigen = std::make_shared<RadialEigenfunction>(solve_radial_eigenfunction(0.5, 512, 1e-9));
    keep0 = std::make_shared<ConformalMetric>(0.0, 0.5, eigen);
    keep = std::make_shared<ConformalMetric>(0.1, 0.5, eigen);
    fam0 = std::make_shared<CurveFamily>(*keep0);
    fam = std::make_shared<CurveFamily>(*keep);
    h0 = std::make_shared<FinslerHandle>(fam0);
    h = std::make_shared<FinslerHandle>(fam);
  }
};

Handles& handles() {
  static Handles h;
  return h;
}

}  // namespace

TEST_CASE("lambda=0 recovery of the Klein norm through the integral") {
  auto& H = handles();
  SplitMix64 rng(61);
  for (int k = 0; k < 12; ++k) {
    const double r = 0.9 * H.h0->R0() * std::sqrt(rng.uniform());
    const double th = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(th), r * std::sin(th)};
    const BoundaryData bd = H.h0->boundary_data(p);
    for (int d = 0; d < 4; ++d) {
      const double phi = rng.uniform(0, 2 * M_PI);
      const TangentVector v{std::cos(phi), std::sin(phi)};
      const double a = H.h0->eval_with_data(bd, v);
      const double b = klein_norm(p, v);
      CHECK(std::abs(a - b) / b < 1e-9);
    }
  }
}

TEST_CASE("fall-through outside R0 and seam continuity") {
  auto& H = handles();
  const double ring = 0.5 * (H.h->R0() + H.h->R());
  for (int k = 0; k < 16; ++k) {
    const double th = 2 * M_PI * k / 16.0;
    const DiskPoint p{ring * std::cos(th), ring * std::sin(th)};
    const TangentVector v{std::cos(2.3 * th), std::sin(2.3 * th)};
    CHECK(H.h->finsler_eval(p, v) == klein_norm(p, v));
  }
  // continuity from inside: the equality region extends below R0
  const double just_inside = H.h->R0() - 1e-4;
  for (int k = 0; k < 8; ++k) {
    const double th = 2 * M_PI * k / 8.0 + 0.1;
    const DiskPoint p{just_inside * std::cos(th), just_inside * std::sin(th)};
    const TangentVector v{std::cos(1.7 * th), std::sin(1.7 * th)};
    const double a = H.h->finsler_eval(p, v);
    const double b = klein_norm(p, v);
    CHECK(std::abs(a - b) / b < 1e-7);
  }
}

TEST_CASE("homogeneity and zero vector") {
  auto& H = handles();
  const DiskPoint p{0.1, -0.05};
  const BoundaryData bd = H.h->boundary_data(p);
  const TangentVector v{0.3, 0.8};
  CHECK(H.h->finsler_eval(p, {0, 0}) == 0.0);
  const double f1 = H.h->eval_with_data(bd, v);
  const double f2 = H.h->eval_with_data(bd, 2.0 * v);
  CHECK(std::abs(f2 - 2.0 * f1) / (2.0 * f1) < 1e-10);
  CHECK(f1 > 0.0);
}

TEST_CASE("norm axioms: convexity probe at sample points") {
  auto& H = handles();
  SplitMix64 rng(67);
  const DiskPoint p{0.12, 0.07};
  const BoundaryData bd = H.h->boundary_data(p);
  for (int k = 0; k < 50; ++k) {
    const TangentVector v{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const TangentVector w{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double fv = H.h->eval_with_data(bd, v);
    const double fw = H.h->eval_with_data(bd, w);
    const double fm = H.h->eval_with_data(bd, (v + w) * 0.5);
    CHECK(fm <= 0.5 * (fv + fw) + 1e-8);
  }
}

TEST_CASE("v_hessian closed forms in the Riemannian regime") {
  auto& H = handles();
  // at the origin F0^2 = |v|^2
  const HessianReport at0 = H.h0->v_hessian({0, 0}, {0.7, 0.3});
  CHECK(at0.eigen_min == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(at0.eigen_max == doctest::Approx(2.0).epsilon(1e-8));

  // p = (1/2, 0) sits in the fall-through region: Hessian is 2 g0
  const HessianReport hb = H.h0->v_hessian({0.5, 0.0}, {1, 0});
  CHECK(hb.eigen_max == doctest::Approx(2.0 * 16.0 / 9.0).epsilon(1e-12));
  CHECK(hb.eigen_min == doctest::Approx(2.0 * 4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("v_hessian against a finite-difference oracle") {
  auto& H = handles();
  const DiskPoint p{0.08, 0.03};
  const BoundaryData bd = H.h->boundary_data(p);
  SplitMix64 rng(71);
  for (int k = 0; k < 6; ++k) {
    const double a = rng.uniform(0, 2 * M_PI);
    const TangentVector v{std::cos(a), std::sin(a)};
    const HessianReport hr = H.h->hessian_with_data(bd, v);
    CHECK(hr.eigen_min > 0.0);
    // oracle: central differences of F^2 with a wide step
    const double step = 1e-3;
    auto F2 = [&](const TangentVector& u) {
      const double f = H.h->eval_with_data(bd, u);
      return f * f;
    };
    const double fd_a =
        (F2({v.x + step, v.y}) - 2 * F2(v) + F2({v.x - step, v.y})) / (step * step);
    const double fd_b = (F2({v.x + step, v.y + step}) - F2({v.x + step, v.y - step}) -
                         F2({v.x - step, v.y + step}) + F2({v.x - step, v.y - step})) /
                        (4 * step * step);
    const double fd_d =
        (F2({v.x, v.y + step}) - 2 * F2(v) + F2({v.x, v.y - step})) / (step * step);
    CHECK(std::abs(hr.hessian.a - fd_a) < 2e-4 * std::abs(fd_a));
    CHECK(std::abs(hr.hessian.d - fd_d) < 2e-4 * std::abs(fd_d));
    CHECK(std::abs(0.5 * (hr.hessian.b + hr.hessian.c) - fd_b) < 5e-4 * hr.eigen_max);
  }
}

TEST_CASE("dual norm: closed form at the origin, scaling, bidual probe") {
  auto& H = handles();
  CHECK(H.h0->dual_norm({0, 0}, {0.6, -0.8}) == doctest::Approx(1.0).epsilon(1e-7));
  const DiskPoint p{0.1, 0.02};
  const BoundaryData bd = H.h->boundary_data(p);
  const TangentVector phi{0.4, 0.9};
  const double d1 = H.h->dual_norm_with_data(bd, phi);
  const double d2 = H.h->dual_norm_with_data(bd, 2.0 * phi);
  CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-9));

  // bidual: max over unit covectors of phi(v)/F*(phi) recovers F(v)
  const TangentVector v{0.3, -0.5};
  const double Fv = H.h->eval_with_data(bd, v);
  double best = 0.0;
  for (int k = 0; k < 720; ++k) {
    const double th = 2 * M_PI * k / 720.0;
    const TangentVector cov{std::cos(th), std::sin(th)};
    const double fs = H.h->dual_norm_with_data(bd, cov);
    best = std::max(best, dot(cov, v) / fs);
  }
  CHECK(std::abs(best - Fv) / Fv < 1e-5);
}

TEST_CASE("finsler_length: straight segment, reparametrization invariance") {
  auto& H = handles();
  auto seg = [&](double t) -> GeodesicState {
    return {{0.5 * t, 0.0}, {0.5, 0.0}};
  };
  const double L = H.h0->finsler_length(seg, 0.0, 1.0);
  CHECK(L == doctest::Approx(std::atanh(0.5)).epsilon(1e-8));

  auto seg_sq = [&](double t) -> GeodesicState {
    return {{0.5 * t * t, 0.0}, {1.0 * t, 0.0}};
  };
  const double L2 = H.h0->finsler_length(seg_sq, 0.0, 1.0);
  CHECK(std::abs(L - L2) / L < 1e-6);

  std::vector<double> ts;
  std::vector<Vec2> pts;
  for (int i = 0; i <= 64; ++i) {
    ts.push_back(i / 64.0);
    pts.push_back({0.5 * i / 64.0, 0.0});
  }
  CHECK(H.h0->finsler_length(ts, pts) == doctest::Approx(std::atanh(0.5)).epsilon(1e-7));
  CHECK_THROWS_AS(H.h0->finsler_length(std::vector<double>{0.0, 1.0},
                                       std::vector<Vec2>{{0.1, 0.1}, {0.1, 0.1}}),
                  std::invalid_argument);
}

TEST_CASE("boundary distance reproduction along the family curves") {
  auto& H = handles();
  const double R = 0.5;
  SplitMix64 rng(73);
  for (int k = 0; k < 4; ++k) {
    const double sep = rng.uniform(M_PI / 4, M_PI);
    const double b0 = rng.uniform(0, 2 * M_PI);
    const BoundaryAngle x(b0, R), y(b0 + sep, R);
    const Vec2 xp = x.point(), yp = y.point();
    TangentVector shoot{};
    bool have = false;
    auto curve = [&](double t) {
      GeodesicState st = H.fam->phi_state(xp, yp, t, have ? &shoot : nullptr, &shoot);
      have = true;
      return st;
    };
    const double L = H.h->finsler_length(curve, 0.0, 1.0);
    const double d = boundary_distance(x, y);
    CHECK(std::abs(L - d) / d < 1e-4);
  }
}

TEST_CASE("finsler_distance: lambda=0 equals hyperbolic, symmetry") {
  auto& H = handles();
  const DiskPoint p{0.1, 0.05}, q{-0.15, 0.2};
  const double d0 = H.h0->finsler_distance(p, q);
  CHECK(d0 == doctest::Approx(hyp_distance(p, q)).epsilon(1e-6));
  CHECK(H.h0->finsler_distance(p, p) == 0.0);

  const double dl = H.h->finsler_distance(p, q);
  const double dr = H.h->finsler_distance(q, p);
  CHECK(std::abs(dl - dr) < 1e-8);
}

TEST_CASE("rotation invariance of the integral metric") {
  auto& H = handles();
  SplitMix64 rng(79);
  for (int k = 0; k < 6; ++k) {
    const double r = 0.85 * H.h->R0() * std::sqrt(rng.uniform());
    const double th = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(th), r * std::sin(th)};
    const TangentVector v{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Mat2 A = rotation(rng.uniform(0, 2 * M_PI));
    const double f1 = H.h->finsler_eval(p, v);
    const double f2 = H.h->finsler_eval(A * p, A * v);
    CHECK(std::abs(f1 - f2) / f1 < 1e-6);
  }
}

TEST_CASE("radial table agrees with the direct route") {
  auto& H = handles();
  H.h->build_radial_table(48);
  SplitMix64 rng(83);
  for (int k = 0; k < 10; ++k) {
    const double r = 0.92 * H.h->R0() * std::sqrt(rng.uniform());
    const double th = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(th), r * std::sin(th)};
    const TangentVector v{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double direct = H.h->finsler_eval(p, v);
    const double table = H.h->eval_table(p, v);
    CHECK(std::abs(direct - table) / direct < 1e-6);
  }
}

TEST_CASE("conjugate scan: clean over horizon 3 in the working range") {
  auto& H = handles();
  SplitMix64 rng(89);
  for (int k = 0; k < 3; ++k) {
    const double r = 0.8 * H.h->R() * std::sqrt(rng.uniform());
    const double th = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(th), r * std::sin(th)};
    const double a = rng.uniform(0, 2 * M_PI);
    TangentVector v{std::cos(a), std::sin(a)};
    v = v / H.h->finsler_eval(p, v);
    const ConjugateScanReport rep = H.h->conjugate_scan(p, v, 3.0, 40);
    CHECK_FALSE(rep.sign_change);
    CHECK(rep.min_abs_det > 0.0);
    CHECK(rep.max_energy_drift < 1e-6);
  }
}
