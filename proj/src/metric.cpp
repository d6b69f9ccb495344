// SPDX-License-Identifier: Apache-2.0
#include "chaining/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <sstream>

#include "chaining/errors.hpp"
#include "chaining/montecarlo.hpp"
#include "chaining/numerics.hpp"
#include "chaining/parallel.hpp"

namespace chaining {

ProcessSpec::ProcessSpec(std::vector<DistributionModel> models) : models_(std::move(models)) {
  if (models_.empty()) throw DomainError("a process needs at least one coordinate");
}

ProcessSpec ProcessSpec::iid(const DistributionModel& model, std::size_t dimension) {
  return ProcessSpec(std::vector<DistributionModel>(dimension, model));
}

bool ProcessSpec::all_of(Family family) const {
  return std::all_of(models_.begin(), models_.end(), [&](const auto& m) { return m.family() == family; });
}

void ProcessSpec::draw(Rng& rng, std::span<double> out) const {
  for (std::size_t i = 0; i < models_.size(); ++i) out[i] = models_[i].draw(rng);
}

nlohmann::json ProcessSpec::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : models_) out.push_back(m.to_json());
  return out;
}

IndexSet::IndexSet(std::vector<std::vector<double>> points, std::vector<std::string> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (!points_.empty()) dimension_ = points_.front().size();
  for (const auto& p : points_) {
    if (p.size() != dimension_) throw DomainError("index set points must share one dimension");
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < points_.size(); ++i) labels_.push_back("t" + std::to_string(i));
  } else if (labels_.size() != points_.size()) {
    throw DomainError("index set labels must match the number of points");
  }
  sparse_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t k = 0; k < dimension_; ++k) {
      if (points_[i][k] != 0.0) sparse_[i].push_back({static_cast<std::uint32_t>(k), points_[i][k]});
    }
  }
}

double IndexSet::inner(std::size_t i, std::span<const double> x) const {
  double s = 0.0;
  for (const auto& e : sparse_[i]) s += e.value * x[e.index];
  return s;
}

IndexSet IndexSet::subset(const std::vector<std::size_t>& indices) const {
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (std::size_t i : indices) {
    pts.push_back(points_.at(i));
    labels.push_back(labels_.at(i));
  }
  return IndexSet(std::move(pts), std::move(labels));
}

IndexSet IndexSet::scaled(double factor) const {
  auto pts = points_;
  for (auto& p : pts) {
    for (double& v : p) v *= factor;
  }
  return IndexSet(std::move(pts), labels_);
}

nlohmann::json IndexSet::to_json() const { return {{"points", points_}, {"labels", labels_}}; }

std::string method_name(NormMethod method) {
  switch (method) {
    case NormMethod::closed_form: return "closed_form";
    case NormMethod::enumeration: return "enumeration";
    case NormMethod::quadrature: return "quadrature";
    case NormMethod::monte_carlo: return "monte_carlo";
    case NormMethod::bracket: return "bracket";
  }
  return "unknown";
}

namespace {

struct Term {
  double coeff;
  const DistributionModel* model;
};

bool is_even_integer(double p) { return p >= 2.0 && p == std::floor(p) && std::fmod(p, 2.0) == 0.0; }

IncrementNormResult exact(double v, NormMethod m) { return {v, 0.0, m}; }

IncrementNormResult by_enumeration(const std::vector<Term>& terms, double p) {
  std::vector<DiscreteLaw> laws;
  laws.reserve(terms.size());
  for (const auto& t : terms) laws.push_back(*t.model->discrete_law());
  std::vector<std::size_t> idx(terms.size(), 0);
  double total = 0.0;
  while (true) {
    double s = 0.0;
    double w = 1.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      s += terms[i].coeff * laws[i][idx[i]].first;
      w *= laws[i][idx[i]].second;
    }
    total += w * std::pow(std::abs(s), p);
    std::size_t k = 0;
    while (k < terms.size() && ++idx[k] == laws[k].size()) idx[k++] = 0;
    if (k == terms.size()) break;
  }
  return exact(std::pow(total, 1.0 / p), NormMethod::enumeration);
}

// E S^p for even p by convolving even-moment sequences one coordinate at a time.
IncrementNormResult by_moment_expansion(const std::vector<Term>& terms, double p) {
  const auto order = static_cast<unsigned>(p);
  const unsigned half = order / 2;
  // moments[j] = E S^(2j)
  std::vector<double> moments(half + 1, 0.0);
  moments[0] = 1.0;
  std::vector<double> next(half + 1);
  for (const auto& t : terms) {
    const double a2 = t.coeff * t.coeff;
    for (unsigned j = 0; j <= half; ++j) {
      double acc = 0.0;
      double a_pow = 1.0;
      for (unsigned l = 0; l <= j; ++l) {
        acc += binomial(2 * j, 2 * l) * a_pow * t.model->even_moment(l) * moments[j - l];
        a_pow *= a2;
      }
      next[j] = acc;
    }
    moments.swap(next);
  }
  return exact(std::pow(moments[half], 1.0 / p), NormMethod::closed_form);
}

// E|S|^p = C_p int_0^inf (1 - phi(u)) / u^(1+p) du, 0 < p < 2, with
// C_p = (2/pi) Gamma(p+1) sin(pi p / 2).
IncrementNormResult by_quadrature(const std::vector<Term>& terms, double p) {
  auto phi = [&](double u) {
    double v = 1.0;
    for (const auto& t : terms) v *= t.model->characteristic_function(t.coeff * u);
    return v;
  };
  auto one_minus_phi = [&](double u) {
    double log_phi = 0.0;
    for (const auto& t : terms) log_phi += t.model->log_characteristic_function(t.coeff * u);
    return -std::expm1(log_phi);
  };
  double scale = 0.0;
  for (const auto& t : terms) scale += t.coeff * t.coeff;
  scale = std::sqrt(scale);
  // Substitute u = w / scale so the integrand lives on the unit scale, then
  // w = v^m on [0, 1] so that (1 - phi) / w^(1+p) ~ w^(1-p) becomes ~ v.
  const double m = 2.0 / (2.0 - p);
  auto head = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double w = std::pow(v, m);
    const double one_minus = one_minus_phi(w / scale);
    return m * one_minus * std::pow(v, m - 1.0) / std::pow(w, 1.0 + p);
  };
  auto tail = [&](double w) { return phi(w / scale) / std::pow(w, 1.0 + p); };
  const double integral = integrate(head, 0.0, 1.0, 1e-12) + 1.0 / p - integrate_to_infinity(tail, 1.0, 1.0, 1e-12);
  const double cp = 2.0 / std::numbers::pi * std::exp(log_gamma(p + 1.0)) * std::sin(std::numbers::pi * p / 2.0);
  const double moment = cp * integral * std::pow(scale, p);
  return exact(std::pow(moment, 1.0 / p), NormMethod::quadrature);
}

IncrementNormResult by_monte_carlo(const std::vector<Term>& terms, double p, const MetricOptions& options) {
  if (p > kMonteCarloMaxP) throw DomainError("Monte Carlo norms are limited to p <= 128");
  const auto est = monte_carlo_mean(options.mc_samples, options.stream, [&](Rng& rng) {
    double s = 0.0;
    for (const auto& t : terms) s += t.coeff * t.model->draw(rng);
    return std::pow(std::abs(s), p);
  });
  const double value = std::pow(est.mean, 1.0 / p);
  const double error = est.mean > 0.0 ? 3.0 * est.std_error * value / (p * est.mean) : 0.0;
  return {value, error, NormMethod::monte_carlo};
}

double pattern_count(const std::vector<Term>& terms) {
  double count = 1.0;
  for (const auto& t : terms) {
    const auto law = t.model->discrete_law();
    if (!law) return kInf;
    count *= static_cast<double>(law->size());
  }
  return count;
}

bool all_have_char_fn(const std::vector<Term>& terms) {
  return std::all_of(terms.begin(), terms.end(), [](const Term& t) {
    return t.model->has_characteristic_function() && !t.model->discrete_law();
  });
}

}  // namespace

IncrementNormResult combination_norm(const ProcessSpec& process, std::span<const double> coeffs, double p,
                                     const MetricOptions& options) {
  if (!(p >= 1.0) || std::isnan(p)) throw DomainError("increment norms need p >= 1");
  if (coeffs.size() != process.dimension()) throw DomainError("coefficient vector does not match process dimension");
  std::vector<Term> terms;
  double l2 = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) {
      terms.push_back({coeffs[i], &process.model(i)});
      l2 += coeffs[i] * coeffs[i];
    }
  }
  l2 = std::sqrt(l2);
  const bool all_gaussian = std::all_of(terms.begin(), terms.end(),
                                        [](const Term& t) { return t.model->family() == Family::gaussian; });

  switch (options.method) {
    case MethodChoice::closed_form:
      if (terms.empty()) return exact(0.0, NormMethod::closed_form);
      if (p == 2.0) return exact(l2, NormMethod::closed_form);
      if (all_gaussian) return exact(l2 * DistributionModel::gaussian().moment(p), NormMethod::closed_form);
      if (terms.size() == 1) return exact(std::abs(terms[0].coeff) * terms[0].model->moment(p), NormMethod::closed_form);
      if (is_even_integer(p)) return by_moment_expansion(terms, p);
      throw DomainError("no closed form for this combination and p");
    case MethodChoice::enumeration:
      if (terms.size() > kForcedEnumerationCap) {
        throw ResourceError("forced enumeration over " + std::to_string(terms.size()) +
                            " nonzero coordinates exceeds the cap of 24");
      }
      if (!std::isfinite(pattern_count(terms))) throw DomainError("enumeration needs finitely supported coordinates");
      if (terms.empty()) return exact(0.0, NormMethod::enumeration);
      return by_enumeration(terms, p);
    case MethodChoice::quadrature:
      if (!(p < 2.0) || !all_have_char_fn(terms)) {
        throw DomainError("quadrature needs p < 2 and continuous coordinates with closed-form characteristic functions");
      }
      if (terms.empty()) return exact(0.0, NormMethod::quadrature);
      return by_quadrature(terms, p);
    case MethodChoice::monte_carlo: return by_monte_carlo(terms, p, options);
    case MethodChoice::automatic: break;
  }

  if (terms.empty()) return exact(0.0, NormMethod::closed_form);
  if (p == 2.0) return exact(l2, NormMethod::closed_form);
  if (all_gaussian) return exact(l2 * DistributionModel::gaussian().moment(p), NormMethod::closed_form);
  if (terms.size() == 1) return exact(std::abs(terms[0].coeff) * terms[0].model->moment(p), NormMethod::closed_form);
  if (pattern_count(terms) <= kAutoEnumerationPatterns) return by_enumeration(terms, p);
  if (is_even_integer(p) && p <= kMonteCarloMaxP) return by_moment_expansion(terms, p);
  if (p < 2.0 && all_have_char_fn(terms)) return by_quadrature(terms, p);
  return by_monte_carlo(terms, p, options);
}

IncrementNormResult increment_norm(const ProcessSpec& process, std::span<const double> s, std::span<const double> t,
                                   double p, const MetricOptions& options) {
  if (s.size() != t.size()) throw DomainError("increment endpoints differ in dimension");
  std::vector<double> diff(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) diff[i] = s[i] - t[i];
  return combination_norm(process, diff, p, options);
}

DistanceMatrix::DistanceMatrix(std::size_t n, double p)
    : n_(n), p_(p), values_(n * n, 0.0), errors_(n * n, 0.0), methods_(n * n, NormMethod::closed_form) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, const IncrementNormResult& r) {
  values_[i * n_ + j] = values_[j * n_ + i] = r.value;
  errors_[i * n_ + j] = errors_[j * n_ + i] = r.error_bound;
  methods_[i * n_ + j] = methods_[j * n_ + i] = r.method;
}

bool DistanceMatrix::exact() const {
  return std::none_of(methods_.begin(), methods_.end(), [](NormMethod m) { return m == NormMethod::monte_carlo; });
}

double DistanceMatrix::max_error() const {
  return errors_.empty() ? 0.0 : *std::max_element(errors_.begin(), errors_.end());
}

IncrementNormResult pair_distance(const IndexSet& T, const ProcessSpec& process, std::size_t i, std::size_t j,
                                  double p, const MetricOptions& options) {
  if (i > j) std::swap(i, j);
  std::uint64_t p_bits;
  static_assert(sizeof p_bits == sizeof p);
  std::memcpy(&p_bits, &p, sizeof p);
  MetricOptions local = options;
  local.stream = options.stream.child(splitmix64(p_bits) ^ (i * T.size() + j));
  return increment_norm(process, T.point(i), T.point(j), p, local);
}

DistanceMatrix distance_matrix(const IndexSet& T, const ProcessSpec& process, double p, const MetricOptions& options) {
  if (T.dimension() != process.dimension() && !T.empty()) {
    throw DomainError("index set dimension does not match the process");
  }
  const std::size_t n = T.size();
  DistanceMatrix matrix(n, p);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<IncrementNormResult> results(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    results[k] = pair_distance(T, process, pairs[k].first, pairs[k].second, p, options);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) matrix.set(pairs[k].first, pairs[k].second, results[k]);
  return matrix;
}

std::string distance_matrix_csv(const DistanceMatrix& matrix, const IndexSet& T) {
  std::ostringstream out;
  char buf[64];
  out << "label";
  for (std::size_t j = 0; j < T.size(); ++j) out << ',' << T.label(j);
  out << '\n';
  for (std::size_t i = 0; i < T.size(); ++i) {
    out << T.label(i);
    for (std::size_t j = 0; j < T.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.at(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

double diameter(const IndexSet& T, const ProcessSpec& process, double p, const MetricOptions& options) {
  if (T.empty()) throw DomainError("diameter of an empty index set");
  const auto matrix = distance_matrix(T, process, p, options);
  double best = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    for (std::size_t j = i + 1; j < T.size(); ++j) best = std::max(best, matrix.at(i, j));
  }
  return best;
}

MetricSpace::MetricSpace(IndexSet T, ProcessSpec process, MetricOptions options)
    : T_(std::move(T)), process_(std::move(process)), options_(options) {
  if (!T_.empty() && T_.dimension() != process_.dimension()) {
    throw DomainError("index set dimension does not match the process");
  }
}

const DistanceMatrix& MetricSpace::matrix(double p) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(p); it != cache_.end()) return *it->second;
  }
  auto computed = std::make_shared<const DistanceMatrix>(distance_matrix(T_, process_, p, options_));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(p, std::move(computed));
  return *it->second;
}

double MetricSpace::distance(std::size_t i, std::size_t j, double p) const {
  if (cached(p)) return matrix(p).at(i, j);
  if (i == j) return 0.0;
  return pair_distance(T_, process_, i, j, p, options_).value;
}

bool MetricSpace::cached(double p) const {
  if (T_.size() <= kMatrixCacheLimit) return true;
  std::lock_guard lock(mutex_);
  return cache_.contains(p);
}

double MetricSpace::block_diameter(std::span<const std::size_t> block, double p) const {
  if (block.size() < 2) return 0.0;
  if (!cached(p)) {
    std::vector<double> row_max(block.size(), 0.0);
    parallel_for(block.size(), [&](std::size_t a) {
      for (std::size_t b = a + 1; b < block.size(); ++b) row_max[a] = std::max(row_max[a], distance(block[a], block[b], p));
    });
    return *std::max_element(row_max.begin(), row_max.end());
  }
  const auto& m = matrix(p);
  double best = 0.0;
  for (std::size_t a = 0; a < block.size(); ++a) {
    for (std::size_t b = a + 1; b < block.size(); ++b) best = std::max(best, m.at(block[a], block[b]));
  }
  return best;
}

double latala_norm(std::span<const double> coeffs, const ProcessSpec& process, int r) {
  if (r < 2 || r % 2 != 0) throw DomainError("latala_norm needs an even r >= 2");
  if (coeffs.size() != process.dimension()) throw DomainError("coefficient vector does not match process dimension");
  std::vector<Term> terms;
  double l2 = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) {
      terms.push_back({coeffs[i], &process.model(i)});
      l2 += coeffs[i] * coeffs[i];
    }
  }
  if (terms.empty()) return 0.0;
  const unsigned half = static_cast<unsigned>(r / 2);
  // sum_i ln E|1 + a_i X_i / u|^r, strictly decreasing in u.
  auto log_product = [&](double u) {
    double total = 0.0;
    for (const auto& t : terms) {
      double acc = 0.0;
      const double x = t.coeff * t.coeff / (u * u);
      double x_pow = 1.0;
      for (unsigned k = 0; k <= half; ++k) {
        acc += binomial(static_cast<unsigned>(r), 2 * k) * x_pow * t.model->even_moment(k);
        x_pow *= x;
      }
      total += std::log(acc);
    }
    return total;
  };
  const double target = static_cast<double>(r);
  double lo = std::sqrt(l2);
  double hi = lo;
  while (log_product(lo) <= target) lo *= 0.5;
  while (log_product(hi) > target) hi *= 2.0;
  while (hi / lo - 1.0 > 1e-13) {
    const double mid = std::sqrt(lo * hi);
    if (log_product(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

}  // namespace chaining
