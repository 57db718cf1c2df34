#include <doctest.h>

#include <cmath>
#include <memory>

#include "finsler/curves.hpp"
#include "finsler/rng.hpp"
#include "finsler/smoothstep.hpp"

using namespace finsler;

namespace {

struct Fixture {
  std::shared_ptr<const RadialEigenfunction> eigen;
  std::shared_ptr<ConformalMetric> cm0, cm;
  std::unique_ptr<CurveFamily> fam0, fam;

  Fixture() {
    eigen = std::make_shared<RadialEigenfunction>(solve_radial_eigenfunction(0.5, 512, 1e-9));
    cm0 = std::make_shared<ConformalMetric>(0.0, 0.5, eigen);
    cm = std::make_shared<ConformalMetric>(0.1, 0.5, eigen);
    fam0 = std::make_unique<CurveFamily>(*cm0);
    fam = std::make_unique<CurveFamily>(*cm);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("phi endpoints and the straight-chord window") {
  auto& fx = fixture();
  const double R = 0.5;
  const BoundaryAngle x(0.3, R), y(2.5, R);
  CHECK(norm(fx.fam->phi(x, y, 0.0) - x.point()) < 1e-12);
  CHECK(norm(fx.fam->phi(x, y, 1.0) - y.point()) < 1e-10);

  // rho vanishes outside (1/4, 3/4): phi equals the chord geodesic there
  for (double t : {0.05, 0.2, 0.25, 0.75, 0.8, 0.97}) {
    const Vec2 a = fx.fam->phi(x, y, t);
    const Vec2 b = klein_chord_point(x.point(), y.point(), t);
    CHECK(norm(a - b) == 0.0);
  }

  // lambda = 0: the whole curve is the chord
  for (double t : {0.1, 0.4, 0.5, 0.6}) {
    const Vec2 a = fx.fam0->phi(x, y, t);
    const Vec2 b = klein_chord_point(x.point(), y.point(), t);
    CHECK(norm(a - b) < 1e-12);
  }
}

TEST_CASE("phi through antipodes passes the origin at t = 1/2") {
  auto& fx = fixture();
  const double R = 0.5;
  for (double b : {0.0, 0.7, 2.1, 4.4}) {
    const BoundaryAngle x(b, R), y(b + M_PI, R);
    CHECK(norm(fx.fam->phi(x, y, 0.5)) < 1e-10);
  }
}

TEST_CASE("phi reversal symmetry phi_x(y,t) = phi_y(x,1-t)") {
  auto& fx = fixture();
  const double R = 0.5;
  SplitMix64 rng(17);
  for (int k = 0; k < 12; ++k) {
    const double b1 = rng.uniform(0, 2 * M_PI);
    const double b2 = b1 + rng.uniform(0.3, M_PI);
    const double t = rng.uniform(0.0, 1.0);
    const BoundaryAngle x(b1, R), y(b2, R);
    CHECK(norm(fx.fam->phi(x, y, t) - fx.fam->phi(y, x, 1.0 - t)) < 1e-9);
  }
}

TEST_CASE("phi boundary containment") {
  auto& fx = fixture();
  const double R = 0.5;
  SplitMix64 rng(19);
  for (int k = 0; k < 60; ++k) {
    const double b1 = rng.uniform(0, 2 * M_PI);
    const double b2 = b1 + rng.uniform(0.1, 2 * M_PI - 0.1);
    const BoundaryAngle x(b1, R), y(b2, R);
    const double tin = rng.uniform(0.02, 0.98);
    CHECK(norm(fx.fam->phi(x, y, tin)) < R);
    double tout = rng.uniform(-1.0, 2.0);
    if (tout > -0.02 && tout < 1.02) tout = tout > 0.5 ? 1.02 : -0.02;
    CHECK(norm(fx.fam->phi(x, y, tout)) >= R - 1e-12);
  }
}

TEST_CASE("phi_velocity matches central differences and never vanishes") {
  auto& fx = fixture();
  const double R = 0.5;
  SplitMix64 rng(23);
  for (int k = 0; k < 15; ++k) {
    const double b1 = rng.uniform(0, 2 * M_PI);
    const double b2 = b1 + rng.uniform(0.4, M_PI);
    const double t = rng.uniform(0.05, 0.95);
    const BoundaryAngle x(b1, R), y(b2, R);
    const TangentVector vel = fx.fam->phi_velocity(x, y, t);
    CHECK(norm(vel) > 0.0);
    const double h = 1e-6;
    const Vec2 fd = (fx.fam->phi(x, y, t + h) - fx.fam->phi(x, y, t - h)) / (2 * h);
    CHECK(norm(vel - fd) < 1e-6 * std::max(1.0, norm(vel)));
  }
  // lambda = 0: velocity parallel to y - x
  const BoundaryAngle x(0.2, R), y(1.9, R);
  for (double t : {0.1, 0.5, 0.9}) {
    const TangentVector vel = fx.fam0->phi_velocity(x, y, t);
    const Vec2 chord = y.point() - x.point();
    CHECK(std::abs(cross(vel, chord)) < 1e-10 * norm(vel) * norm(chord));
  }
}

TEST_CASE("sigma: closed-form seed case at lambda=0") {
  auto& fx = fixture();
  const double R = 0.5;
  // x=(0.5,0), p=(0,0.25) -> y=(-0.3,0.4)
  const EndpointSolve sol = fx.fam0->sigma(BoundaryAngle(0.0, R), {0.0, 0.25});
  CHECK(sol.y.point().x == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(sol.y.point().y == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(sol.t > 0.0);
  CHECK(sol.t < 1.0);
}

TEST_CASE("sigma round trip through phi") {
  auto& fx = fixture();
  const double R = 0.5;
  SplitMix64 rng(29);
  for (int k = 0; k < 40; ++k) {
    const double b1 = rng.uniform(0, 2 * M_PI);
    const double b2 = b1 + rng.uniform(0.3, 2 * M_PI - 0.3);
    const double t = rng.uniform(0.05, 0.95);
    const BoundaryAngle x(b1, R), y(b2, R);
    const Vec2 p = fx.fam->phi(x, y, t);
    const EndpointSolve sol = fx.fam->sigma(x, p);
    CHECK(std::abs(angle_diff(sol.y.angle, wrap_angle(b2))) < 1e-8);
    CHECK(sol.t == doctest::Approx(t).epsilon(1e-8));
  }
}

TEST_CASE("sigma involution and rotation equivariance") {
  auto& fx = fixture();
  const double R = 0.5;
  SplitMix64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const double bx = rng.uniform(0, 2 * M_PI);
    const double r = 0.4 * std::sqrt(rng.uniform());
    const double th = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(th), r * std::sin(th)};
    const BoundaryAngle x(bx, R);
    const EndpointSolve fwd = fx.fam->sigma(x, p);
    const EndpointSolve back = fx.fam->sigma(fwd.y, p);
    CHECK(std::abs(angle_diff(back.y.angle, x.angle)) < 1e-8);

    const double rot = rng.uniform(0, 2 * M_PI);
    const Mat2 A = rotation(rot);
    const EndpointSolve rotated = fx.fam->sigma(BoundaryAngle(bx + rot, R), A * p);
    CHECK(std::abs(angle_diff(rotated.y.angle, fwd.y.angle + rot)) < 1e-8);
  }
}

TEST_CASE("sigma_jacobian: Property (C) kernel, tangency, FD oracle") {
  auto& fx = fixture();
  const double R = 0.5;
  SplitMix64 rng(37);
  for (int k = 0; k < 12; ++k) {
    const double bx = rng.uniform(0, 2 * M_PI);
    const double r = 0.38 * std::sqrt(rng.uniform());
    const double th = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(th), r * std::sin(th)};
    const BoundaryAngle x(bx, R);

    const SigmaSolution sol = fx.fam->sigma_full(x, p);
    const Mat2 J = fx.fam->sigma_jacobian(x, p);

    // kernel: the curve velocity at p
    const Vec2 v = sol.velocity;
    const Vec2 Jv = J * v;
    const double scale = norm(J.col(0)) + norm(J.col(1));
    CHECK(norm(Jv) < 1e-6 * scale * norm(v));

    // image tangent to the circle at sigma(x, p)
    const BoundaryAngle y(sol.beta_y, R);
    for (const Vec2 w : {Vec2{1.0, 0.0}, Vec2{0.3, -0.9}}) {
      const Vec2 Jw = J * w;
      CHECK(std::abs(dot(y.point(), Jw)) < 1e-7 * std::max(1.0, norm(Jw)));
    }

    // central finite differences of the solver itself
    const double h = 1e-6 * R;
    Mat2 J_fd;
    for (int c = 0; c < 2; ++c) {
      const Vec2 e = c == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
      const EndpointSolve sp = fx.fam->sigma(x, p + e);
      const EndpointSolve sm = fx.fam->sigma(x, p - e);
      const double dAngle = angle_diff(sp.y.angle, sm.y.angle) / (2 * h);
      const Vec2 col = R * y.tangent() * dAngle;
      if (c == 0) {
        J_fd.a = col.x;
        J_fd.c = col.y;
      } else {
        J_fd.b = col.x;
        J_fd.d = col.y;
      }
    }
    CHECK(std::abs(J.a - J_fd.a) < 1e-5 * scale);
    CHECK(std::abs(J.b - J_fd.b) < 1e-5 * scale);
    CHECK(std::abs(J.c - J_fd.c) < 1e-5 * scale);
    CHECK(std::abs(J.d - J_fd.d) < 1e-5 * scale);
  }
}

TEST_CASE("solve_chord: collinear diameter case and consistency") {
  auto& fx = fixture();
  {
    const ChordSolve cs = fx.fam0->solve_chord({0.1, 0.0}, {0.2, 0.0});
    CHECK(std::abs(cs.x.point().y) < 1e-9);
    CHECK(cs.t0 < cs.t1);
    CHECK(norm(fx.fam0->phi(cs.x, cs.y, cs.t0) - Vec2{0.1, 0.0}) < 1e-8);
    CHECK(norm(fx.fam0->phi(cs.x, cs.y, cs.t1) - Vec2{0.2, 0.0}) < 1e-8);
  }
  SplitMix64 rng(43);
  for (int k = 0; k < 15; ++k) {
    const double r1 = 0.42 * std::sqrt(rng.uniform()), a1 = rng.uniform(0, 2 * M_PI);
    const double r2 = 0.42 * std::sqrt(rng.uniform()), a2 = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r1 * std::cos(a1), r1 * std::sin(a1)};
    const DiskPoint q{r2 * std::cos(a2), r2 * std::sin(a2)};
    if (norm(p - q) < 0.05) continue;
    const ChordSolve cs = fx.fam->solve_chord(p, q);
    CHECK(cs.t0 < cs.t1);
    CHECK(norm(fx.fam->phi(cs.x, cs.y, cs.t0) - p) < 1e-8);
    CHECK(norm(fx.fam->phi(cs.x, cs.y, cs.t1) - q) < 1e-8);
  }
  CHECK_THROWS_AS(fx.fam->solve_chord({0.1, 0.1}, {0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("solve_chord uniqueness probe: swapped roles land on the same chord") {
  auto& fx = fixture();
  SplitMix64 rng(47);
  for (int k = 0; k < 10; ++k) {
    const double r1 = 0.42 * std::sqrt(rng.uniform()), a1 = rng.uniform(0, 2 * M_PI);
    const double r2 = 0.42 * std::sqrt(rng.uniform()), a2 = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r1 * std::cos(a1), r1 * std::sin(a1)};
    const DiskPoint q{r2 * std::cos(a2), r2 * std::sin(a2)};
    if (norm(p - q) < 0.05) continue;
    const ChordSolve a = fx.fam->solve_chord(p, q);
    const ChordSolve b = fx.fam->solve_chord(q, p);
    const bool same = std::abs(angle_diff(a.x.angle, b.x.angle)) < 1e-6 &&
                      std::abs(angle_diff(a.y.angle, b.y.angle)) < 1e-6;
    const bool swapped = std::abs(angle_diff(a.x.angle, b.y.angle)) < 1e-6 &&
                         std::abs(angle_diff(a.y.angle, b.x.angle)) < 1e-6;
    CHECK((same || swapped));
  }
}

TEST_CASE("solve_direction: diameter case, flip, alignment") {
  auto& fx = fixture();
  {
    const DirectedCurveSolve ds = fx.fam0->solve_direction({0.0, 0.0}, {1.0, 0.0});
    CHECK(norm(ds.e_minus.point() - Vec2{-0.5, 0.0}) < 1e-9);
    CHECK(norm(ds.e_plus.point() - Vec2{0.5, 0.0}) < 1e-9);
    CHECK(ds.chart.t == doctest::Approx(0.5).epsilon(1e-9));
  }
  SplitMix64 rng(53);
  for (int k = 0; k < 12; ++k) {
    const double r = 0.4 * std::sqrt(rng.uniform()), a = rng.uniform(0, 2 * M_PI);
    const DiskPoint p{r * std::cos(a), r * std::sin(a)};
    const double vd = rng.uniform(0, 2 * M_PI);
    const TangentVector v{std::cos(vd), std::sin(vd)};
    const DirectedCurveSolve ds = fx.fam->solve_direction(p, v);
    const TangentVector vel = fx.fam->phi_velocity(ds.chart.x, ds.chart.y, ds.chart.t);
    CHECK(dot(vel, v) > 0.0);
    CHECK(std::abs(cross(v, vel)) < 1e-8 * norm(v) * norm(vel));
    CHECK(norm(fx.fam->phi(ds.chart.x, ds.chart.y, ds.chart.t) - p) < 1e-8);

    const DirectedCurveSolve flip = fx.fam->solve_direction(p, -1.0 * v);
    CHECK(std::abs(angle_diff(flip.e_minus.angle, ds.e_plus.angle)) < 1e-7);
    CHECK(std::abs(angle_diff(flip.e_plus.angle, ds.e_minus.angle)) < 1e-7);
  }
  CHECK_THROWS_AS(fx.fam->solve_direction({0.1, 0.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("injectivity probe passes for lambda in the working range") {
  auto& fx = fixture();
  const InjectivityReport r0 = fx.fam0->injectivity_probe(400, 99);
  CHECK(r0.pass);
  const InjectivityReport r1 = fx.fam->injectivity_probe(400, 99);
  CHECK(r1.pass);
  CHECK(r1.pairs_checked > 0);
}
