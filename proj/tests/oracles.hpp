// Independent reference computations for tests. Deliberately naive: composite
// Simpson rules and brute-force enumeration, no shared code with the library.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n = 200000) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) sum += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// E|g|^p by quadrature over [0, 40].
inline double gaussian_abs_moment(double p) {
  return 2.0 * simpson([p](double x) { return std::pow(x, p) * normal_pdf(x); }, 0.0, 40.0);
}

// E|S|^p for S = sum a_i eps_i by enumerating all sign patterns.
inline double rademacher_abs_moment(const std::vector<double>& a, double p) {
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1U) ? a[i] : -a[i];
    total += std::pow(std::abs(s), p);
  }
  return total / static_cast<double>(std::size_t{1} << n);
}

// Finite law as (value, probability); E|sum a_i X_i|^p by full enumeration.
using Law = std::vector<std::pair<double, double>>;
inline double discrete_abs_moment(const std::vector<double>& a, const std::vector<Law>& laws, double p) {
  double total = 0.0;
  std::vector<std::size_t> idx(a.size(), 0);
  while (true) {
    double s = 0.0;
    double w = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      s += a[i] * laws[i][idx[i]].first;
      w *= laws[i][idx[i]].second;
    }
    total += w * std::pow(std::abs(s), p);
    std::size_t k = 0;
    while (k < a.size() && ++idx[k] == laws[k].size()) idx[k++] = 0;
    if (k == a.size()) break;
  }
  return total;
}

inline Law rademacher_law() { return {{-1.0, 0.5}, {1.0, 0.5}}; }
inline Law three_point_law(double a) { return {{-a, 0.5 / (a * a)}, {0.0, 1.0 - 1.0 / (a * a)}, {a, 0.5 / (a * a)}}; }

}  // namespace oracle
