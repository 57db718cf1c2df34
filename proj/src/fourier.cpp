#include "finsler/fourier.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

FourierSeries FourierSeries::fit(const std::vector<double>& samples, double tail_tol) {
  const int n = static_cast<int>(samples.size());
  const int kmax = n / 2;
  FourierSeries s;
  s.a.assign(kmax + 1, 0.0);
  s.b.assign(kmax + 1, 0.0);

  double mean = 0.0;
  for (double v : samples) mean += v;
  s.a[0] = mean / n;

  double scale = std::abs(s.a[0]);
  const double step = 2.0 * M_PI / n;
  // rotation recurrence per harmonic avoids n*k transcendental calls
  std::vector<double> cj(n), sj(n);
  for (int j = 0; j < n; ++j) {
    cj[j] = std::cos(j * step);
    sj[j] = std::sin(j * step);
  }
  std::vector<double> ck(n, 1.0), sk(n, 0.0);  // cos/sin of k*j*step
  for (int k = 1; k <= kmax; ++k) {
    double ca = 0.0, cb = 0.0;
    for (int j = 0; j < n; ++j) {
      const double c = ck[j] * cj[j] - sk[j] * sj[j];
      const double si = sk[j] * cj[j] + ck[j] * sj[j];
      ck[j] = c;
      sk[j] = si;
      ca += samples[j] * c;
      cb += samples[j] * si;
    }
    const double w = (2 * k == n) ? 1.0 : 2.0;
    s.a[k] = w * ca / n;
    s.b[k] = w * cb / n;
    scale = std::max(scale, std::max(std::abs(s.a[k]), std::abs(s.b[k])));
  }

  // truncate the geometric tail
  int keep = kmax;
  while (keep > 1 && std::abs(s.a[keep]) < tail_tol * scale &&
         std::abs(s.b[keep]) < tail_tol * scale)
    --keep;
  s.a.resize(keep + 1);
  s.b.resize(keep + 1);
  return s;
}

double FourierSeries::eval(double beta) const {
  double out = a[0];
  const double c1 = std::cos(beta), s1 = std::sin(beta);
  double ck = 1.0, sk = 0.0;  // cos(k beta), sin(k beta) by recurrence
  for (size_t k = 1; k < a.size(); ++k) {
    const double c = ck * c1 - sk * s1;
    const double s = sk * c1 + ck * s1;
    ck = c;
    sk = s;
    out += a[k] * ck + b[k] * sk;
  }
  return out;
}

double FourierSeries::deriv(double beta) const {
  double out = 0.0;
  const double c1 = std::cos(beta), s1 = std::sin(beta);
  double ck = 1.0, sk = 0.0;
  for (size_t k = 1; k < a.size(); ++k) {
    const double c = ck * c1 - sk * s1;
    const double s = sk * c1 + ck * s1;
    ck = c;
    sk = s;
    out += static_cast<double>(k) * (-a[k] * sk + b[k] * ck);
  }
  return out;
}

double FourierSeries::tail_fraction(const std::vector<double>& samples) {
  FourierSeries s = fit(samples, 0.0);
  const int kmax = s.harmonics();
  double scale = std::abs(s.a[0]);
  for (int k = 1; k <= kmax; ++k)
    scale = std::max(scale, std::max(std::abs(s.a[k]), std::abs(s.b[k])));
  // magnitude of the top decile relative to the largest coefficient; a
  // geometric decay reaching the solver noise floor reads as ~1e-10 here
  double tail = 0.0;
  for (int k = (9 * kmax) / 10; k <= kmax; ++k)
    tail = std::max(tail, std::max(std::abs(s.a[k]), std::abs(s.b[k])));
  return scale > 0.0 ? tail / scale : 0.0;
}

}  // namespace finsler
