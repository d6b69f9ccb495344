// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <limits>

namespace chaining {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

// Integral of f over [a, inf). Integrates successive intervals whose width
// doubles, stopping once an interval contributes less than 1e-12 of the
// running total. f must be nonnegative and eventually decreasing.
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double initial_width = 1.0, double rel_tol = 1e-10);

// log(erfc(x)) for x >= 0, accurate far beyond the underflow of erfc.
double log_erfc(double x);

// Standard normal distribution function.
double normal_cdf(double x);

// ln Gamma(x), x > 0.
double log_gamma(double x);

// Binomial coefficient as a double.
double binomial(unsigned n, unsigned k);

}  // namespace chaining
