#include "finsler/quadrature.hpp"

#include <map>
#include <mutex>

namespace finsler {

static QuadRule compute_rule(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const QuadRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

static double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                           double coarse, double tol_abs, int n, int depth) {
  const double fine_l = gl_integrate(f, a, 0.5 * (a + b), n);
  const double fine_r = gl_integrate(f, 0.5 * (a + b), b, n);
  const double fine = fine_l + fine_r;
  if (std::abs(fine - coarse) <= tol_abs || depth <= 0) return fine;
  return adaptive_rec(f, a, 0.5 * (a + b), fine_l, tol_abs * 0.5, n, depth - 1) +
         adaptive_rec(f, 0.5 * (a + b), b, fine_r, tol_abs * 0.5, n, depth - 1);
}

double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double rel_tol, int n, int max_depth) {
  const double coarse = gl_integrate(f, a, b, n);
  const double scale = std::max(std::abs(coarse), 1e-300);
  return adaptive_rec(f, a, b, coarse, rel_tol * scale, n, max_depth);
}

}  // namespace finsler
