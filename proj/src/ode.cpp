#include "finsler/ode.hpp"

namespace finsler {

void dp54_integrate(const std::function<void(double, const State4&, State4&)>& rhs, State4& y,
                    double t0, double t1, const OdeOptions& opt) {
  static const std::function<bool(const State4&)> inside = [](const State4& s) {
    return s[0] * s[0] + s[1] * s[1] < 1.0;
  };
  dp54_integrate_n<4>(rhs, y, t0, t1, opt, inside);
}

}  // namespace finsler
