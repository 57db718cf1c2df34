#pragma once

#include <vector>

namespace finsler {

// Real trigonometric interpolant of a smooth 2pi-periodic function from
// uniform samples. Coefficients beyond the requested tail tolerance are
// dropped.
struct FourierSeries {
  std::vector<double> a;  // cos coefficients, a[0] = mean
  std::vector<double> b;  // sin coefficients, b[0] unused

  static FourierSeries fit(const std::vector<double>& samples, double tail_tol = 1e-14);

  double eval(double beta) const;
  double deriv(double beta) const;
  int harmonics() const { return static_cast<int>(a.size()) - 1; }

  // relative magnitude of the top decile of harmonics; large values signal
  // undersampling
  static double tail_fraction(const std::vector<double>& samples);
};

}  // namespace finsler
