#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace interimkm::numerics {

/// Gauss-Kronrod quadrature of f over [a, b]. Interior `breakpoints` (kinks
/// or jumps of the integrand) are honoured by integrating each piece
/// separately. `rel_tol` is relative to the L1 norm of each piece.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                 std::span<const double> breakpoints = {}) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += rule::integrate(f, cuts[i], cuts[i + 1], 20, rel_tol);
  }
  return total;
}

/// Root of f in [lo, hi] given a sign change. Regula falsi with the Illinois
/// weighting, falling back to bisection whenever the bracket fails to halve.
template <class F>
double find_root(F&& f, double lo, double hi, double x_tol = 1e-10,
                 double f_tol = 0.0, int max_iter = 500) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  require(std::signbit(fa) != std::signbit(fb),
          "find_root: interval does not bracket a root");
  int side = 0;
  double last_width = b - a;
  for (int iter = 0; iter < max_iter; ++iter) {
    double x = (a * fb - b * fa) / (fb - fa);
    const bool bisect = !(x > a && x < b) || (iter % 3 == 2 && (b - a) > 0.5 * last_width);
    if (bisect) {
      x = 0.5 * (a + b);
      last_width = b - a;
    }
    const double fx = f(x);
    if (fx == 0.0 || std::abs(fx) <= f_tol) return x;
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (b - a <= x_tol) break;
  }
  return 0.5 * (a + b);
}

double normal_cdf(double x);

/// Inverse of the standard normal cdf, accurate to about 1e-15 on (0, 1).
double normal_quantile(double p);

/// Upper alpha-quantile of the standard normal: P(Z > xi) = alpha.
inline double normal_upper_quantile(double alpha) {
  return -normal_quantile(alpha);
}

}  // namespace interimkm::numerics
