// SPDX-License-Identifier: Apache-2.0
#include "chaining/stochlab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "chaining/errors.hpp"

namespace chaining {

namespace {

void check_sup_inputs(const ProcessSpec& process, const IndexSet& T, std::size_t samples) {
  if (T.empty()) throw DomainError("supremum over an empty index set");
  if (T.dimension() != process.dimension()) throw DomainError("index set dimension does not match the process");
  if (samples < kMinSupSamples) {
    throw DomainError("supremum estimates need at least " + std::to_string(kMinSupSamples) + " samples");
  }
}

std::vector<double>& scratch(std::size_t n) {
  thread_local std::vector<double> buffer;
  buffer.resize(n);
  return buffer;
}

double ratio_sigma(double ratio, const MeanEstimate& num, const MeanEstimate& den, double power) {
  const double a = num.mean > 0.0 ? num.std_error / num.mean : 0.0;
  const double b = den.mean > 0.0 ? den.std_error / den.mean : 0.0;
  return ratio * power * std::sqrt(a * a + b * b);
}

}  // namespace

std::string target_name(SupTarget target) {
  switch (target) {
    case SupTarget::sup_increments: return "sup_increments";
    case SupTarget::sup_abs: return "sup_abs";
    case SupTarget::max_only: return "max_only";
  }
  return "unknown";
}

SupTarget parse_target(const std::string& name) {
  if (name == "sup_increments") return SupTarget::sup_increments;
  if (name == "sup_abs") return SupTarget::sup_abs;
  if (name == "max_only") return SupTarget::max_only;
  throw ValidationError("unknown supremum target '" + name + "'");
}

nlohmann::json to_json(const MeanEstimate& m) {
  return {{"mean", m.mean}, {"stderr", m.std_error}, {"samples", m.samples}};
}

nlohmann::json SupremumEstimate::to_json() const {
  return {{"mean", mean},   {"stderr", std_error},      {"samples", samples},
          {"seed", seed},   {"stream_id", stream_id},   {"target", target_name(target)}};
}

SupremumEstimate to_sup_estimate(const MeanEstimate& m, const RngStream& stream, SupTarget target) {
  SupremumEstimate e;
  e.mean = m.mean;
  e.std_error = m.std_error;
  e.samples = m.samples;
  e.seed = stream.master_seed;
  e.stream_id = stream.stream_id;
  e.target = target;
  return e;
}

Extremes extremes(const IndexSet& T, std::span<const double> x) {
  Extremes e{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double v = T.inner(i, x);
    e.max = std::max(e.max, v);
    e.min = std::min(e.min, v);
  }
  return e;
}

double sup_statistic(const Extremes& e, SupTarget target) {
  switch (target) {
    case SupTarget::sup_increments: return e.max - e.min;
    case SupTarget::sup_abs: return std::max(std::abs(e.max), std::abs(e.min));
    case SupTarget::max_only: return e.max;
  }
  return 0.0;
}

SupremumEstimate estimate_sup(const ProcessSpec& process, const IndexSet& T, std::size_t samples,
                              const RngStream& stream, SupTarget target) {
  check_sup_inputs(process, T, samples);
  const auto m = monte_carlo_mean(samples, stream, [&](Rng& rng) {
    auto& x = scratch(process.dimension());
    process.draw(rng, x);
    return sup_statistic(extremes(T, x), target);
  });
  return to_sup_estimate(m, stream, target);
}

std::vector<MeanEstimate> estimate_sup_common(const ProcessSpec& process, const std::vector<IndexSet>& sets,
                                              std::size_t samples, const RngStream& stream, SupTarget target) {
  if (sets.empty()) throw DomainError("no index sets given");
  for (const auto& T : sets) check_sup_inputs(process, T, samples);
  const std::size_t k = sets.size();
  return monte_carlo_means(samples, 2 * k - 1, stream, [&](Rng& rng, std::span<double> out) {
    auto& x = scratch(process.dimension());
    process.draw(rng, x);
    for (std::size_t j = 0; j < k; ++j) out[j] = sup_statistic(extremes(sets[j], x), target);
    for (std::size_t j = 0; j + 1 < k; ++j) out[k + j] = out[j] - out[j + 1];
  });
}

std::vector<double> sup_samples(const ProcessSpec& process, const IndexSet& T, std::size_t samples,
                                const RngStream& stream, SupTarget target) {
  check_sup_inputs(process, T, samples);
  return monte_carlo_samples(samples, stream, [&](Rng& rng) {
    auto& x = scratch(process.dimension());
    process.draw(rng, x);
    return sup_statistic(extremes(T, x), target);
  });
}

std::vector<OrderStatRow> order_stat_means(const DistributionModel& model, std::size_t n,
                                           const std::vector<std::size_t>& ks, std::size_t samples,
                                           const RngStream& stream, const std::vector<double>& qs) {
  if (n == 0) throw DomainError("order statistics need n >= 1");
  for (auto k : ks) {
    if (k < 1 || k > n) throw DomainError("order statistic index k=" + std::to_string(k) + " outside [1, n]");
  }
  const std::size_t top = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
  const auto est = monte_carlo_means(samples, 2 * ks.size(), stream, [&](Rng& rng, std::span<double> out) {
    auto& x = scratch(n);
    for (auto& v : x) v = std::abs(model.draw(rng));
    std::partial_sort(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(top), x.end(), std::greater<>());
    for (std::size_t j = 0; j < ks.size(); ++j) {
      out[2 * j] = x[ks[j] - 1];
      double sum = 0.0;
      for (std::size_t i = 0; i < ks[j]; ++i) sum += x[i];
      out[2 * j + 1] = sum;
    }
  });
  std::vector<OrderStatRow> rows(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    rows[j].k = ks[j];
    rows[j].value = est[2 * j];
    rows[j].prefix_sum = est[2 * j + 1];
    for (double q : qs) {
      const double bound =
          2.0 * std::pow(static_cast<double>(n) / static_cast<double>(ks[j]), 1.0 / q) * model.moment(q);
      rows[j].bounds.emplace_back(q, bound);
    }
  }
  return rows;
}

nlohmann::json PaleyZygmundResult::to_json() const {
  return {{"lambda", lambda}, {"lhs", lhs},       {"rhs", rhs},   {"mean", mean}, {"second_moment", second_moment},
          {"lhs_stderr", lhs_std_error}, {"exact", exact}, {"pass", pass}};
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("Paley-Zygmund lambda must lie in (0, 1)");
}

double pz_rhs(double lambda, double mean, double m2) {
  return m2 > 0.0 ? (1.0 - lambda) * (1.0 - lambda) * mean * mean / m2 : 0.0;
}

}  // namespace

PaleyZygmundResult paley_zygmund_check(const DiscreteLaw& law, double lambda) {
  check_lambda(lambda);
  if (law.empty()) throw DomainError("empty law");
  PaleyZygmundResult r;
  r.lambda = lambda;
  double total = 0.0;
  for (const auto& [v, pr] : law) {
    if (v < 0.0) throw DomainError("Paley-Zygmund needs S >= 0");
    if (pr < 0.0) throw DomainError("negative probability");
    r.mean += v * pr;
    r.second_moment += v * v * pr;
    total += pr;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("probabilities do not sum to 1");
  for (const auto& [v, pr] : law) {
    if (v >= lambda * r.mean) r.lhs += pr;
  }
  r.rhs = pz_rhs(lambda, r.mean, r.second_moment);
  r.pass = r.lhs >= r.rhs;
  return r;
}

PaleyZygmundResult paley_zygmund_check(std::span<const double> samples, double lambda) {
  check_lambda(lambda);
  if (samples.empty()) throw DomainError("no samples");
  PaleyZygmundResult r;
  r.lambda = lambda;
  r.exact = false;
  for (double v : samples) {
    if (v < 0.0) throw DomainError("Paley-Zygmund needs S >= 0");
    r.mean += v;
    r.second_moment += v * v;
  }
  const double n = static_cast<double>(samples.size());
  r.mean /= n;
  r.second_moment /= n;
  double hits = 0.0;
  for (double v : samples) {
    if (v >= lambda * r.mean) hits += 1.0;
  }
  r.lhs = hits / n;
  r.lhs_std_error = std::sqrt(r.lhs * (1.0 - r.lhs) / n);
  r.rhs = pz_rhs(lambda, r.mean, r.second_moment);
  r.pass = r.lhs + 3.0 * r.lhs_std_error >= r.rhs;
  return r;
}

nlohmann::json ContractionResult::to_json() const {
  nlohmann::json j{{"p", p},
                   {"norm_a", {{"value", norm_a.value}, {"error_bound", norm_a.error_bound}, {"method", method_name(norm_a.method)}}},
                   {"norm_b", {{"value", norm_b.value}, {"error_bound", norm_b.error_bound}, {"method", method_name(norm_b.method)}}},
                   {"norm_pass", norm_pass},
                   {"pass", pass}};
  if (has_sup) {
    j["sup_a"] = sup_a.to_json();
    j["sup_b"] = sup_b.to_json();
    j["combined_stderr"] = combined_std_error;
    j["sup_pass"] = sup_pass;
  }
  return j;
}

ContractionResult contraction_check(std::span<const double> a, std::span<const double> b, double p,
                                    const IndexSet* T, std::size_t samples, const RngStream& stream) {
  if (a.size() != b.size() || a.empty()) throw DomainError("contraction needs coefficient vectors of equal length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) > std::abs(b[i])) {
      throw DomainError("contraction precondition |a_i| <= |b_i| fails at i=" + std::to_string(i));
    }
  }
  const auto proc = ProcessSpec::iid(DistributionModel::rademacher(), a.size());
  ContractionResult r;
  r.p = p;
  r.norm_a = combination_norm(proc, a, p);
  r.norm_b = combination_norm(proc, b, p);
  r.norm_pass = r.norm_a.value <= r.norm_b.value * (1.0 + 1e-12) + r.norm_a.error_bound + r.norm_b.error_bound;
  if (T) {
    if (T->dimension() != a.size()) throw DomainError("index set dimension does not match the coefficients");
    auto weighted = [&](std::span<const double> w) {
      std::vector<std::vector<double>> pts = T->points();
      for (auto& pt : pts)
        for (std::size_t i = 0; i < pt.size(); ++i) pt[i] *= w[i];
      return IndexSet(std::move(pts), T->labels());
    };
    const auto est = estimate_sup_common(proc, {weighted(a), weighted(b)}, samples, stream, SupTarget::max_only);
    r.has_sup = true;
    r.sup_a = to_sup_estimate(est[0], stream, SupTarget::max_only);
    r.sup_b = to_sup_estimate(est[1], stream, SupTarget::max_only);
    r.combined_std_error = std::hypot(est[0].std_error, est[1].std_error);
    r.sup_pass = r.sup_a.mean <= r.sup_b.mean + 3.0 * r.combined_std_error;
  }
  r.pass = r.norm_pass && r.sup_pass;
  return r;
}

nlohmann::json SymmetrizationResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& pr : pairs) {
    rows.push_back({{"s", pr.s},
                    {"t", pr.t},
                    {"norm", pr.norm},
                    {"symmetrized_norm", pr.symmetrized_norm},
                    {"ratio", pr.ratio},
                    {"ratio_sigma", pr.ratio_sigma},
                    {"pass", pr.pass}});
  }
  return {{"p", p},
          {"samples", samples},
          {"pairs", rows},
          {"sup", chaining::to_json(sup)},
          {"symmetrized_sup", chaining::to_json(symmetrized_sup)},
          {"symmetrized_max", chaining::to_json(symmetrized_max)},
          {"identity_gap", chaining::to_json(identity_gap)},
          {"sup_ratio", sup_ratio},
          {"sup_ratio_sigma", sup_ratio_sigma},
          {"moments_pass", moments_pass},
          {"sup_pass", sup_pass},
          {"identity_pass", identity_pass},
          {"pass", pass}};
}

SymmetrizationResult symmetrization_check(const ProcessSpec& process, const IndexSet& T, double p,
                                          std::size_t samples, const RngStream& stream) {
  check_sup_inputs(process, T, samples);
  if (!(p >= 1.0)) throw DomainError("symmetrization check needs p >= 1");
  const std::size_t m = T.size();
  const std::size_t dim = process.dimension();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = s + 1; t < m; ++t) pairs.emplace_back(s, t);
  const std::size_t np = pairs.size();
  const auto est = monte_carlo_means(samples, 2 * np + 4, stream, [&](Rng& rng, std::span<double> out) {
    auto& buf = scratch(2 * dim + 2 * m);
    std::span<double> x(buf.data(), dim);
    std::span<double> y(buf.data() + dim, dim);
    std::span<double> v(buf.data() + 2 * dim, m);
    std::span<double> w(buf.data() + 2 * dim + m, m);
    process.draw(rng, x);
    for (std::size_t i = 0; i < dim; ++i) y[i] = rng.sign() * x[i];
    for (std::size_t t = 0; t < m; ++t) {
      v[t] = T.inner(t, x);
      w[t] = T.inner(t, y);
    }
    for (std::size_t k = 0; k < np; ++k) {
      out[2 * k] = std::pow(std::abs(v[pairs[k].first] - v[pairs[k].second]), p);
      out[2 * k + 1] = std::pow(std::abs(w[pairs[k].first] - w[pairs[k].second]), p);
    }
    const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
    const auto [wmin, wmax] = std::minmax_element(w.begin(), w.end());
    out[2 * np] = *vmax - *vmin;
    out[2 * np + 1] = *wmax - *wmin;
    out[2 * np + 2] = *wmax;
    out[2 * np + 3] = (*wmax - *wmin) - 2.0 * *wmax;
  });
  SymmetrizationResult r;
  r.p = p;
  r.samples = samples;
  r.moments_pass = true;
  for (std::size_t k = 0; k < np; ++k) {
    SymmetrizationPair pr;
    pr.s = pairs[k].first;
    pr.t = pairs[k].second;
    const auto& a = est[2 * k];
    const auto& b = est[2 * k + 1];
    pr.norm = std::pow(a.mean, 1.0 / p);
    pr.symmetrized_norm = std::pow(b.mean, 1.0 / p);
    if (a.mean > 0.0) {
      pr.ratio = pr.symmetrized_norm / pr.norm;
      pr.ratio_sigma = ratio_sigma(pr.ratio, b, a, 1.0 / p);
      pr.pass = pr.ratio >= 0.5 - 3.0 * pr.ratio_sigma && pr.ratio <= 2.0 + 3.0 * pr.ratio_sigma;
    } else {
      pr.ratio = 1.0;
      pr.pass = b.mean == 0.0;
    }
    r.moments_pass = r.moments_pass && pr.pass;
    r.pairs.push_back(pr);
  }
  r.sup = est[2 * np];
  r.symmetrized_sup = est[2 * np + 1];
  r.symmetrized_max = est[2 * np + 2];
  r.identity_gap = est[2 * np + 3];
  if (r.sup.mean > 0.0) {
    r.sup_ratio = r.symmetrized_sup.mean / r.sup.mean;
    r.sup_ratio_sigma = ratio_sigma(r.sup_ratio, r.symmetrized_sup, r.sup, 1.0);
    r.sup_pass = r.sup_ratio >= 0.5 - 3.0 * r.sup_ratio_sigma && r.sup_ratio <= 2.0 + 3.0 * r.sup_ratio_sigma;
  } else {
    r.sup_ratio = 1.0;
    r.sup_pass = r.symmetrized_sup.mean == 0.0;
  }
  r.identity_pass = std::abs(r.identity_gap.mean) <= 3.0 * r.identity_gap.std_error;
  r.pass = r.moments_pass && r.sup_pass && r.identity_pass;
  return r;
}

}  // namespace chaining
