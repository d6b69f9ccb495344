// SPDX-License-Identifier: Apache-2.0
#include "chaining/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

namespace chaining {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, rel_tol);
}

double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double initial_width, double rel_tol) {
  double total = 0.0;
  double lo = a;
  double width = initial_width;
  for (int step = 0; step < 2000; ++step) {
    const double piece = integrate(f, lo, lo + width, rel_tol);
    total += piece;
    lo += width;
    width *= 2.0;
    // Require a few intervals so an integrand that starts at zero is not cut off.
    if (step >= 3 && std::abs(piece) <= 1e-12 * std::abs(total)) break;
    if (!std::isfinite(lo)) break;
  }
  return total;
}

double log_erfc(double x) {
  if (x < 26.0) return std::log(boost::math::erfc(x));
  // Asymptotic expansion erfc(x) ~ exp(-x^2)/(x sqrt(pi)) * sum_n (-1)^n (2n-1)!!/(2x^2)^n.
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double series = 1.0;
  for (int n = 1; n <= 10; ++n) {
    term *= -(2.0 * n - 1.0) * inv;
    series += term;
  }
  return -x * x - std::log(x * std::sqrt(std::numbers::pi)) + std::log(series);
}

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2); }

double log_gamma(double x) { return boost::math::lgamma(x); }

double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  return boost::math::binomial_coefficient<double>(n, k);
}

}  // namespace chaining
