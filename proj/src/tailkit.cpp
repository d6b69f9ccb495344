// SPDX-License-Identifier: Apache-2.0
#include "chaining/tailkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "chaining/errors.hpp"
#include "chaining/metric.hpp"

namespace chaining {

RegularityConstants regularity_constants(double alpha) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw DomainError("alpha must be >= 1");
  constexpr double e = std::numbers::e;
  RegularityConstants k;
  k.alpha = alpha;
  k.t0 = 1.0 - 1.0 / e;
  k.kappa_alpha = 4.0 * e * e / (e - 1.0) * alpha * alpha * alpha;
  k.b_alpha = std::log(e * 4.0 * alpha * alpha);
  k.T_alpha = 4.0 * e * alpha * alpha * alpha;
  k.L_alpha = k.kappa_alpha * k.kappa_alpha;
  return k;
}

std::optional<SublinearityViolation> find_sublinearity_violation(const TailFunction& f, double c, double t0,
                                                                 double upper) {
  const double hi = upper / (8.0 * c);
  const double lo = std::max(t0, upper * 1e-9);
  if (!(hi > lo)) return std::nullopt;
  for (double lambda : {1.0, 2.0, 4.0, 8.0}) {
    for (double t : log_grid(lo, hi, 256)) {
      const double base = f(t);
      const double stretched = f(c * lambda * t);
      if (std::isinf(stretched)) continue;
      if (std::isinf(base) || stretched < lambda * base * (1.0 - 1e-12)) return SublinearityViolation{lambda, t};
    }
  }
  return std::nullopt;
}

namespace {

// Integral of a running supremum, stored as knots (x_i, h_i, g_i) with h
// piecewise linear and g its exact integral, so g is convex.
class ConvexMinorant final : public TailFunction::Impl {
 public:
  ConvexMinorant(double start, std::vector<double> x, std::vector<double> h, std::vector<double> g, double support)
      : start_(start), x_(std::move(x)), h_(std::move(h)), g_(std::move(g)), support_(support) {}

  double value(double t) const override {
    if (t <= start_) return 0.0;
    if (t > support_) return kInf;
    if (t >= x_.back()) return g_.back() + h_.back() * (t - x_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double d = t - x_[i];
    const double slope = (h_[i + 1] - h_[i]) / (x_[i + 1] - x_[i]);
    return g_[i] + d * (h_[i] + 0.5 * slope * d);
  }

  double support_bound() const override { return support_; }

  double inverse(double level) const override {
    if (level <= 0.0) return 0.0;
    if (level > g_.back()) {
      if (std::isfinite(support_)) return support_;
      return x_.back() + (level - g_.back()) / h_.back();
    }
    const auto it = std::lower_bound(g_.begin(), g_.end(), level);
    const std::size_t j = static_cast<std::size_t>(it - g_.begin());
    if (j == 0) return x_.front();
    const std::size_t i = j - 1;
    const double r = level - g_[i];
    const double slope = (h_[i + 1] - h_[i]) / (x_[i + 1] - x_[i]);
    // Solve g_i + h_i d + slope d^2 / 2 = level for the smallest d >= 0.
    const double disc = std::sqrt(std::max(0.0, h_[i] * h_[i] + 2.0 * slope * r));
    const double d = (h_[i] + disc) > 0.0 ? 2.0 * r / (h_[i] + disc) : 0.0;
    return std::min(x_[i] + d, x_[i + 1]);
  }

  std::string representation() const override { return "convex_minorant"; }

 private:
  double start_;
  std::vector<double> x_;
  std::vector<double> h_;
  std::vector<double> g_;
  double support_;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TailFunction convex_minorant(const TailFunction& f, double c, double t0, double upper, std::size_t points_per_decade) {
  if (!(c >= 2.0)) throw DomainError("convex_minorant needs c >= 2");
  if (!(t0 >= 0.0)) throw DomainError("convex_minorant needs t0 >= 0");
  const double start = c * t0;
  if (!(upper > start) || !std::isfinite(upper)) throw DomainError("convex_minorant needs a finite upper > c t0");
  if (auto v = find_sublinearity_violation(f, c, t0, upper)) {
    throw PreconditionError("sublinearity f(c lambda t) >= lambda f(t) fails at lambda=" + fmt17(v->lambda) +
                            ", t=" + fmt17(v->t));
  }

  double support = kInf;
  double reach = upper;
  if (std::isfinite(f.support_bound()) && c * f.support_bound() <= upper) {
    support = c * f.support_bound();
    reach = support;
  }
  if (!(reach > start)) {
    // f is infinite right from the start: g is 0 at c t0 and infinite beyond.
    return TailFunction::from_impl(std::make_shared<ConvexMinorant>(
        start, std::vector<double>{start, start * 2.0 + 1.0}, std::vector<double>{0.0, 0.0},
        std::vector<double>{0.0, 0.0}, start));
  }

  std::vector<double> x;
  if (start > 0.0) {
    const auto count = static_cast<std::size_t>(
        std::ceil(static_cast<double>(points_per_decade) * std::log10(reach / start))) + 2;
    x = log_grid(start, reach, count);
  } else {
    const double first = reach * 1e-12;
    const auto count = static_cast<std::size_t>(12 * points_per_decade) + 2;
    x = log_grid(first, reach, count);
    x.insert(x.begin(), 0.0);
  }

  std::vector<double> h(x.size());
  double running = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0) continue;
    const double raw = f(x[i] / c) / x[i];
    if (std::isfinite(raw)) running = std::max(running, raw);
    h[i] = running;
  }
  if (x.front() <= 0.0) h[0] = h[1];

  std::vector<double> g(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) g[i] = g[i - 1] + 0.5 * (h[i] + h[i - 1]) * (x[i] - x[i - 1]);

  return TailFunction::from_impl(
      std::make_shared<ConvexMinorant>(start, std::move(x), std::move(h), std::move(g), support));
}

double envelope_upper_bound(const RegularityConstants& k) { return 200.0 * k.L_alpha * std::max(2.0, k.T_alpha); }

TailFunction log_concave_envelope(const DistributionModel& model, double alpha) {
  const auto witness = check_alpha_regular(model, alpha);
  if (!witness.pass) {
    throw PreconditionError(model.name() + " is not " + fmt17(alpha) + "-regular on the default grid: witness (q, p) = (" +
                            fmt17(witness.q) + ", " + fmt17(witness.p) + "), ratio " + fmt17(witness.ratio));
  }
  const auto k = regularity_constants(alpha);
  return convex_minorant(model.tail(), k.kappa_alpha, k.t0, envelope_upper_bound(k));
}

SandwichReport check_sandwich(const TailFunction& n, const TailFunction& m, double dilation,
                              const std::vector<double>& grid, double slack) {
  SandwichReport report;
  report.worst_slack = kInf;
  for (double t : grid) {
    SandwichRow row{t, n(t), m(t), m(dilation * t)};
    report.rows.push_back(row);
    if (std::isinf(row.n)) continue;
    const double tol = slack * std::max(1.0, std::abs(row.n));
    const double lower_gap = row.n - row.m;
    const double upper_gap = row.m_shifted - row.n;
    report.worst_slack = std::min({report.worst_slack, lower_gap, upper_gap});
    if (lower_gap < -tol || upper_gap < -tol) ++report.violations;
  }
  return report;
}

GrowthConstant growth_constant(double alpha, double beta, double r) {
  if (!(r > 1.0)) throw DomainError("growth_constant needs r > 1");
  if (!(alpha >= 1.0)) throw DomainError("growth_constant needs alpha >= 1");
  if (!(beta > 1.0)) throw DomainError("growth_constant needs beta > 1");
  int k = 0;
  while (std::ldexp(1.0, k - 2) < r) ++k;
  const double C = (std::numbers::ln2 + 2.0 * std::pow(beta, k) * std::log(2.0 * alpha)) / std::numbers::ln2;
  return {C, k};
}

double tail_cap(double alpha, double beta, int k) {
  return 2.0 * (std::numbers::ln2 + 2.0 * std::pow(beta, k) * std::log(2.0 * alpha));
}

ModerateGrowthResult check_moderate_growth(const TailFunction& n, double r, double C, double t_min, double t_max) {
  if (!(t_min >= 2.0)) throw DomainError("check_moderate_growth needs t_min >= 2");
  if (!(r > 1.0)) throw DomainError("check_moderate_growth needs r > 1");
  if (t_max <= 0.0) t_max = 1000.0 * t_min;
  ModerateGrowthResult result;
  result.grid = log_grid(t_min, t_max, 512);
  result.pass = true;
  result.worst_ratio = 0.0;
  for (double t : result.grid) {
    const double base = n(t);
    const double stretched = n(r * t);
    double ratio;
    if (std::isinf(base) || std::isinf(stretched)) {
      ratio = kInf;
    } else if (base == 0.0) {
      ratio = stretched > 0.0 ? kInf : 0.0;
    } else {
      ratio = stretched / base;
    }
    if (result.worst_t == 0.0 || ratio > result.worst_ratio) {
      result.worst_ratio = ratio;
      result.worst_t = t;
    }
    if (ratio > C * (1.0 + 1e-12)) result.pass = false;
  }
  return result;
}

SurrogateFamily::SurrogateFamily(RegularityConstants constants, double beta, double t_alpha, double gamma,
                                 double gamma_tilde, std::vector<SurrogateCoordinate> coordinates)
    : constants_(constants),
      beta_(beta),
      t_alpha_(t_alpha),
      gamma_(gamma),
      gamma_tilde_(gamma_tilde),
      coordinates_(std::move(coordinates)) {}

CoupledDraw SurrogateFamily::draw(std::size_t i, Rng& rng) const {
  const auto& c = coordinates_.at(i);
  const double sign = rng.sign();
  const double level = rng.exponential();
  const double v = rng.uniform();
  CoupledDraw d;
  const double ax = c.model.abs_from_exponential(level);
  const double ay = c.envelope.inverse(level);
  const double au = std::min(t_alpha_, -std::log(c.p + v * (1.0 - c.p)) / c.lambda);
  d.x = sign * ax;
  d.x_tilde = sign * std::max(ax, constants_.T_alpha);
  d.y = sign * ay;
  d.u = sign * au;
  d.z = ay > t_alpha_ ? d.y : d.u;
  return d;
}

double SurrogateFamily::z_abs_mean_lower_bound(std::size_t i) const {
  const double m = coordinates_.at(i).envelope_at_t_alpha;
  return t_alpha_ / m * (-std::expm1(-m));
}

SurrogateFamily build_surrogates(const ProcessSpec& process, double alpha, double beta) {
  const auto k = regularity_constants(alpha);
  const double t_alpha = k.L_alpha * std::max(2.0, k.T_alpha);
  const double gamma = growth_constant(alpha, beta, 2.0 * k.L_alpha).C;
  const double gamma_tilde = std::max(2.0, gamma);

  std::vector<SurrogateCoordinate> coords;
  coords.reserve(process.dimension());
  for (std::size_t i = 0; i < process.dimension(); ++i) {
    const auto& model = process.model(i);
    const auto speed = check_speed_beta(model, beta);
    if (!speed.pass) {
      throw PreconditionError("coordinate " + std::to_string(i) + " (" + model.name() + ") fails speed " + fmt17(beta) +
                              " at p=" + fmt17(speed.q) + ", ratio " + fmt17(speed.ratio));
    }
    SurrogateCoordinate c{model, log_concave_envelope(model, alpha), {}, {}, {}, 0.0, 0.0, 0.0};
    const double m_at = c.envelope(t_alpha);
    if (!(m_at > 0.0)) throw PreconditionError("degenerate envelope: M(t_alpha) = 0 for coordinate " + std::to_string(i));
    c.envelope_at_t_alpha = m_at;
    c.lambda = m_at / t_alpha;
    c.p = std::exp(-m_at);
    const TailFunction n = model.tail();
    const double T = k.T_alpha;
    c.clipped_tail = TailFunction::analytic([n, T](double t) { return t < T ? 0.0 : n(t); }, n.support_bound(),
                                            "clipped_tail");
    const double lambda = c.lambda;
    const double p = c.p;
    c.u_tail = TailFunction::analytic(
        [lambda, p](double t) {
          // -ln((exp(-lambda t) - p) / (1 - p))
          return lambda * t - std::log1p(-p * std::exp(lambda * t)) + std::log1p(-p);
        },
        t_alpha, "truncated_exponential");
    const TailFunction m = c.envelope;
    c.moderate_tail = TailFunction::analytic(
        [m, lambda, t_alpha](double t) { return t <= t_alpha ? lambda * t : m(t); }, m.support_bound(),
        "moderate_envelope");
    coords.push_back(std::move(c));
  }
  return SurrogateFamily(k, beta, t_alpha, gamma, gamma_tilde, std::move(coords));
}

std::string tail_to_csv(const TailFunction& tail, const std::vector<double>& grid) {
  std::ostringstream out;
  out << "t,N\n";
  for (double t : grid) out << fmt17(t) << ',' << fmt17(tail(t)) << '\n';
  return out.str();
}

}  // namespace chaining
