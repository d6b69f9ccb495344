// SPDX-License-Identifier: Apache-2.0
#include "chaining/dist.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "chaining/errors.hpp"
#include "chaining/numerics.hpp"

namespace chaining {

namespace {

constexpr unsigned kEvenMomentTable = 64;  // E X^(2k) for k <= 64, i.e. up to p = 128

// ln of integral_0^inf p t^(p-1) exp(-N(t)) dt. The integrand is scaled by its
// maximum and integrated over the window where it exceeds e^-60 of it.
double log_tail_moment(const TailFunction& tail, double p) {
  auto log_density = [&](double t) {
    if (t <= 0.0) return p >= 1.0 ? -kInf : kInf;
    const double n = tail(t);
    if (!std::isfinite(n)) return -kInf;
    return (p - 1.0) * std::log(t) - n;
  };
  const double bound = tail.support_bound();
  double upper = std::isfinite(bound) ? bound : 1.0;
  if (!std::isfinite(bound)) {
    while (upper < 4.0 || log_density(2.0 * upper) > log_density(upper) - 50.0) {
      upper *= 2.0;
      if (upper > 1e12) break;
    }
  }
  double shift = -kInf;
  double argmax = upper;
  const double grid_lo = upper * 1e-9;
  for (double t : log_grid(grid_lo, upper, 1024)) {
    const double v = log_density(t);
    if (v > shift) {
      shift = v;
      argmax = t;
    }
  }
  constexpr double kWindow = 60.0;
  double hi = argmax;
  if (std::isfinite(bound)) {
    hi = bound;
  } else {
    while (log_density(hi) > shift - kWindow) hi *= 1.25;
  }
  double lo = argmax;
  while (lo > argmax * 1e-12 && log_density(lo) > shift - kWindow) lo *= 0.8;
  if (p < 1.0) lo = 0.0;
  auto integrand = [&](double t) {
    const double v = log_density(t);
    return std::isfinite(v) ? std::exp(v - shift) : 0.0;
  };
  // A mode at the grid floor leaves a lower piece bounded by its length.
  const double lower = argmax == grid_lo && p >= 1.0 ? argmax - lo : integrate(integrand, lo, argmax, 1e-11);
  const double total = lower + integrate(integrand, argmax, hi, 1e-11);
  return shift + std::log(p * total);
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::sym_exponential: return "sym_exponential";
    case Family::sym_weibull: return "sym_weibull";
    case Family::three_point: return "three_point";
    case Family::log_concave_tail: return "log_concave_tail";
  }
  return "unknown";
}

struct DistributionModel::State {
  Family family = Family::gaussian;
  double param = 0.0;  // weibull shape or three-point atom
  double scale = 1.0;
  TailFunction raw_tail;  // log_concave_tail only
  TailFunction tail;
  double ess_sup = kInf;
  std::vector<double> table_t;  // log_concave_tail descriptor knots, kept for serialization
  std::vector<double> table_n;
  std::array<double, kEvenMomentTable + 1> even{};

  double log_abs_moment(double p) const {
    switch (family) {
      case Family::gaussian:
        return 0.5 * p * std::numbers::ln2 + log_gamma(0.5 * (p + 1.0)) - 0.5 * std::log(std::numbers::pi);
      case Family::rademacher: return 0.0;
      case Family::sym_exponential: return log_gamma(p + 1.0) - 0.5 * p * std::numbers::ln2;
      case Family::sym_weibull: return p * std::log(scale) + log_gamma(1.0 + p / param);
      case Family::three_point: return (p - 2.0) * std::log(param);
      case Family::log_concave_tail: return p * std::log(scale) + log_tail_moment(raw_tail, p);
    }
    return 0.0;
  }
};

DistributionModel DistributionModel::gaussian() {
  auto s = std::make_shared<State>();
  s->family = Family::gaussian;
  s->tail = TailFunction::analytic([](double t) { return -log_erfc(t / std::numbers::sqrt2); }, kInf, "gaussian");
  for (unsigned k = 0; k <= kEvenMomentTable; ++k) s->even[k] = std::exp(s->log_abs_moment(2.0 * k));
  return DistributionModel(std::move(s));
}

DistributionModel DistributionModel::rademacher() {
  auto s = std::make_shared<State>();
  s->family = Family::rademacher;
  s->ess_sup = 1.0;
  s->tail = TailFunction::analytic([](double) { return 0.0; }, 1.0, "rademacher");
  s->even.fill(1.0);
  return DistributionModel(std::move(s));
}

DistributionModel DistributionModel::sym_exponential() {
  auto s = std::make_shared<State>();
  s->family = Family::sym_exponential;
  s->scale = 1.0 / std::numbers::sqrt2;
  s->tail = TailFunction::analytic([](double t) { return std::numbers::sqrt2 * t; }, kInf, "sym_exponential");
  for (unsigned k = 0; k <= kEvenMomentTable; ++k) s->even[k] = std::exp(s->log_abs_moment(2.0 * k));
  return DistributionModel(std::move(s));
}

DistributionModel DistributionModel::sym_weibull(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("sym_weibull shape must be positive");
  auto s = std::make_shared<State>();
  s->family = Family::sym_weibull;
  s->param = shape;
  s->scale = std::exp(-0.5 * log_gamma(1.0 + 2.0 / shape));
  const double scale = s->scale;
  s->tail = TailFunction::analytic([scale, shape](double t) { return std::pow(t / scale, shape); }, kInf,
                                   "sym_weibull");
  for (unsigned k = 0; k <= kEvenMomentTable; ++k) s->even[k] = std::exp(s->log_abs_moment(2.0 * k));
  return DistributionModel(std::move(s));
}

DistributionModel DistributionModel::three_point(double atom) {
  if (!(atom > 1.0) || !std::isfinite(atom)) throw DomainError("three_point atom must exceed 1");
  auto s = std::make_shared<State>();
  s->family = Family::three_point;
  s->param = atom;
  s->ess_sup = atom;
  const double level = 2.0 * std::log(atom);
  s->tail = TailFunction::analytic([level](double) { return level; }, atom, "three_point");
  s->even[0] = 1.0;
  for (unsigned k = 1; k <= kEvenMomentTable; ++k) s->even[k] = std::pow(atom, 2.0 * k - 2.0);
  return DistributionModel(std::move(s));
}

DistributionModel DistributionModel::from_tail(const TailFunction& raw_tail) {
  if (!raw_tail.valid()) throw DomainError("log_concave_tail model needs a tail function");
  if (raw_tail(0.0) < 0.0) throw DomainError("tail function must be nonnegative");
  auto s = std::make_shared<State>();
  s->family = Family::log_concave_tail;
  s->raw_tail = raw_tail;
  const double log_m2 = log_tail_moment(raw_tail, 2.0);
  if (!std::isfinite(log_m2)) throw DomainError("tail function has no finite second moment");
  s->scale = std::exp(-0.5 * log_m2);
  const double scale = s->scale;
  s->ess_sup = raw_tail.support_bound() * scale;
  s->tail = TailFunction::analytic([raw_tail, scale](double t) { return raw_tail(t / scale); }, s->ess_sup,
                                   "log_concave_tail");
  s->even[0] = 1.0;
  s->even[1] = 1.0;
  for (unsigned k = 2; k <= kEvenMomentTable; ++k) s->even[k] = std::exp(s->log_abs_moment(2.0 * k));
  return DistributionModel(std::move(s));
}

DistributionModel DistributionModel::from_json(const nlohmann::json& descriptor) {
  if (!descriptor.is_object() || !descriptor.contains("family") || !descriptor["family"].is_string()) {
    throw ValidationError("model descriptor needs a string field 'family'");
  }
  const std::string family = descriptor["family"];
  const nlohmann::json params = descriptor.value("params", nlohmann::json::object());
  auto number = [&](const char* key) -> double {
    if (!params.contains(key) || !params[key].is_number()) {
      throw ValidationError("model '" + family + "' needs numeric params." + key);
    }
    return params[key].get<double>();
  };
  if (family == "gaussian") return gaussian();
  if (family == "rademacher") return rademacher();
  if (family == "sym_exponential") return sym_exponential();
  if (family == "sym_weibull") return sym_weibull(number("shape"));
  if (family == "three_point") return three_point(number("atom"));
  if (family == "log_concave_tail") {
    if (!params.contains("t") || !params.contains("N")) {
      throw ValidationError("log_concave_tail needs params.t and params.N arrays");
    }
    auto t = params["t"].get<std::vector<double>>();
    auto n = params["N"].get<std::vector<double>>();
    auto model = from_tail(TailFunction::interpolated(t, n));
    auto state = std::make_shared<State>(*model.state_);
    state->table_t = std::move(t);
    state->table_n = std::move(n);
    return DistributionModel(std::move(state));
  }
  throw ValidationError("unknown model family '" + family + "'");
}

nlohmann::json DistributionModel::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  switch (state_->family) {
    case Family::sym_weibull: params["shape"] = state_->param; break;
    case Family::three_point: params["atom"] = state_->param; break;
    case Family::log_concave_tail:
      params["t"] = state_->table_t;
      params["N"] = state_->table_n;
      break;
    default: break;
  }
  return {{"family", name()}, {"params", params}};
}

Family DistributionModel::family() const { return state_->family; }
std::string DistributionModel::name() const { return family_name(state_->family); }
double DistributionModel::scale() const { return state_->scale; }

double DistributionModel::log_abs_moment(double p) const {
  if (!(p > 0.0)) throw DomainError("moment order must be positive");
  if (p == 2.0) return 0.0;
  return state_->log_abs_moment(p);
}

double DistributionModel::abs_moment(double p) const { return std::exp(log_abs_moment(p)); }

double DistributionModel::moment(double p) const {
  if (!(p >= 1.0)) throw DomainError("moment order p must be >= 1");
  if (p == 2.0) return 1.0;
  return std::exp(log_abs_moment(p) / p);
}

double DistributionModel::even_moment(unsigned k) const {
  if (k <= kEvenMomentTable) return state_->even[k];
  return std::exp(state_->log_abs_moment(2.0 * k));
}

double DistributionModel::tail_value(double t) const {
  if (!(t >= 0.0)) throw DomainError("tail_value needs t >= 0");
  return state_->tail(t);
}

const TailFunction& DistributionModel::tail() const { return state_->tail; }
double DistributionModel::essential_sup() const { return state_->ess_sup; }

double DistributionModel::abs_from_exponential(double level) const {
  switch (state_->family) {
    case Family::gaussian: {
      const double survival = std::exp(-level);
      if (survival > 1e-300) return std::numbers::sqrt2 * boost::math::erfc_inv(survival);
      return state_->tail.inverse(level);
    }
    case Family::rademacher: return 1.0;
    case Family::sym_exponential: return level / std::numbers::sqrt2;
    case Family::sym_weibull: return state_->scale * std::pow(level, 1.0 / state_->param);
    case Family::three_point: return level <= 2.0 * std::log(state_->param) ? 0.0 : state_->param;
    case Family::log_concave_tail: return state_->scale * state_->raw_tail.inverse(level);
  }
  return 0.0;
}

std::optional<DiscreteLaw> DistributionModel::discrete_law() const {
  if (state_->family == Family::rademacher) return DiscreteLaw{{-1.0, 0.5}, {1.0, 0.5}};
  if (state_->family == Family::three_point) {
    const double a = state_->param;
    const double edge = 0.5 / (a * a);
    return DiscreteLaw{{-a, edge}, {0.0, 1.0 - 2.0 * edge}, {a, edge}};
  }
  return std::nullopt;
}

bool DistributionModel::has_characteristic_function() const {
  switch (state_->family) {
    case Family::gaussian:
    case Family::rademacher:
    case Family::sym_exponential:
    case Family::three_point: return true;
    default: return false;
  }
}

double DistributionModel::characteristic_function(double u) const {
  switch (state_->family) {
    case Family::gaussian: return std::exp(-0.5 * u * u);
    case Family::rademacher: return std::cos(u);
    case Family::sym_exponential: return 1.0 / (1.0 + 0.5 * u * u);
    case Family::three_point: {
      const double a = state_->param;
      return 1.0 - 1.0 / (a * a) + std::cos(a * u) / (a * a);
    }
    default: throw DomainError("no closed-form characteristic function for " + name());
  }
}

double DistributionModel::log_characteristic_function(double u) const {
  auto log_one_minus = [](double x) { return x >= 1.0 ? -kInf : std::log1p(-x); };
  switch (state_->family) {
    case Family::gaussian: return -0.5 * u * u;
    case Family::rademacher: {
      const double s = std::sin(0.5 * u);
      return log_one_minus(2.0 * s * s);
    }
    case Family::sym_exponential: return -std::log1p(0.5 * u * u);
    case Family::three_point: {
      const double a = state_->param;
      const double s = std::sin(0.5 * a * u);
      return log_one_minus(2.0 * s * s / (a * a));
    }
    default: throw DomainError("no closed-form characteristic function for " + name());
  }
}

double DistributionModel::draw(Rng& rng) const {
  switch (state_->family) {
    case Family::gaussian: return rng.normal();
    case Family::rademacher: return rng.sign();
    default: {
      const double s = rng.sign();
      return s * abs_from_exponential(rng.exponential());
    }
  }
}

std::vector<double> DistributionModel::sample(const RngStream& stream, std::size_t count) const {
  Rng rng(stream);
  std::vector<double> out(count);
  for (double& x : out) x = draw(rng);
  return out;
}

const std::vector<double>& default_p_grid() {
  static const std::vector<double> grid{2, 2.5, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128};
  return grid;
}

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("p_grid must not be empty");
  for (double p : grid) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("p_grid values must be finite and >= 2");
  }
}

}  // namespace

RegularityWitness check_alpha_regular(const DistributionModel& model, double alpha, const std::vector<double>& p_grid) {
  if (!(alpha >= 1.0)) throw DomainError("alpha must be >= 1");
  validate_grid(p_grid);
  std::vector<double> grid = p_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> norms(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) norms[i] = model.moment(grid[i]);

  RegularityWitness w;
  w.grid = grid;
  w.pass = true;
  w.q = w.p = grid.front();
  w.ratio = 1.0;
  w.normalized_ratio = 1.0;
  bool first = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double ratio = norms[j] / norms[i];
      const double normalized = ratio * grid[i] / grid[j];
      if (first || normalized > w.normalized_ratio) {
        w.q = grid[i];
        w.p = grid[j];
        w.ratio = ratio;
        w.normalized_ratio = normalized;
        first = false;
      }
      if (ratio > alpha * grid[j] / grid[i]) w.pass = false;
    }
  }
  return w;
}

RegularityWitness check_speed_beta(const DistributionModel& model, double beta, const std::vector<double>& p_grid) {
  if (!(beta > 1.0)) throw DomainError("beta must be > 1");
  validate_grid(p_grid);
  std::vector<double> grid = p_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  RegularityWitness w;
  w.grid = grid;
  w.pass = true;
  bool first = true;
  for (double p : grid) {
    const double ratio = model.moment(beta * p) / model.moment(p);
    if (first || ratio < w.ratio) {
      w.q = p;
      w.p = beta * p;
      w.ratio = ratio;
      w.normalized_ratio = ratio;
      first = false;
    }
    if (!(ratio >= 2.0)) w.pass = false;
  }
  return w;
}

nlohmann::json to_json(const RegularityWitness& w) {
  return {{"verdict", w.pass ? "pass" : "fail"},
          {"witness_pair", {w.q, w.p}},
          {"ratio", w.ratio},
          {"normalized_ratio", w.normalized_ratio},
          {"grid", w.grid}};
}

}  // namespace chaining
