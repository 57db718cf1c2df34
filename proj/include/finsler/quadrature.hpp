#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace finsler {

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
const QuadRule& gauss_legendre(int n);

// integrate f over [a, b] with an n-node rule
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

// bisection-adaptive Gauss-Legendre: refines panels until the n vs 2n
// difference on each panel meets the tolerance
double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double rel_tol, int n = 16, int max_depth = 24);

}  // namespace finsler
