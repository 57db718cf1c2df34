#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace finsler {

using State4 = std::array<double, 4>;  // (q_x, q_y, v_x, v_y)

struct OdeOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double initial_step = 1e-2;
  double min_step = 1e-14;
  int max_steps = 200000;
};

struct HorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace dp54 {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp54

// Dormand-Prince 5(4), adaptive; a step is rejected whenever `valid` fails on
// a stage value (used to keep geodesics inside the open unit disk).
template <std::size_t N>
void dp54_integrate_n(const std::function<void(double, const std::array<double, N>&,
                                               std::array<double, N>&)>& rhs,
                      std::array<double, N>& y, double t0, double t1, const OdeOptions& opt,
                      const std::function<bool(const std::array<double, N>&)>& valid) {
  using namespace dp54;
  using State = std::array<double, N>;
  if (t0 == t1) return;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * std::min(opt.initial_step, std::abs(t1 - t0));

  State k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
  rhs(t, y, k1);  // FSAL: k1 stays valid at (t, y) across rejections

  for (int step = 0; step < opt.max_steps; ++step) {
    if (dir * (t - t1) >= 0.0) return;
    if (dir * (t + h - t1) > 0.0) h = t1 - t;

    bool bad = false;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    bad = !valid(tmp);
    if (!bad) {
      rhs(t + c2 * h, tmp, k2);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      bad = !valid(tmp);
    }
    if (!bad) {
      rhs(t + c3 * h, tmp, k3);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      bad = !valid(tmp);
    }
    if (!bad) {
      rhs(t + c4 * h, tmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      bad = !valid(tmp);
    }
    if (!bad) {
      rhs(t + c5 * h, tmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] =
            y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      bad = !valid(tmp);
    }
    if (!bad) {
      rhs(t + h, tmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      bad = !valid(ynew);
    }

    if (bad) {
      h *= 0.5;
      if (std::abs(h) < opt.min_step)
        throw HorizonError("integration step underflow near the ideal boundary");
      continue;
    }

    rhs(t + h, ynew, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(err + 1e-30, -0.2)));
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
    if (std::abs(h) < opt.min_step) throw HorizonError("integration step underflow");
  }
  throw HorizonError("integration exceeded the step budget");
}

void dp54_integrate(const std::function<void(double, const State4&, State4&)>& rhs, State4& y,
                    double t0, double t1, const OdeOptions& opt);

}  // namespace finsler
