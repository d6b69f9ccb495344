// SPDX-License-Identifier: Apache-2.0
#include "chaining/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chaining/errors.hpp"
#include "chaining/numerics.hpp"

namespace chaining {

namespace {

MeanEstimate summarize(const std::vector<double>& xs) {
  MeanEstimate m;
  m.samples = xs.size();
  if (xs.empty()) return m;
  double mean = 0.0;
  double m2 = 0.0;
  double n = 0.0;
  for (double x : xs) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  m.mean = mean;
  m.variance = xs.size() > 1 ? m2 / (n - 1.0) : 0.0;
  m.std_error = std::sqrt(m.variance / n);
  return m;
}

double relative_sigma(const MeanEstimate& a) { return a.mean > 0.0 ? a.std_error / a.mean : 0.0; }

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

nlohmann::json witness_json(const SeparationWitness& w) {
  return {{"s", w.s}, {"t", w.t}, {"distance", w.distance}, {"error_bound", w.error_bound}};
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

// ---------------------------------------------------------------- Sudakov

nlohmann::json SudakovReport::to_json() const {
  nlohmann::json off = nlohmann::json::array();
  for (const auto& w : offending) off.push_back(witness_json(w));
  return {{"p", p},
          {"u", u},
          {"cardinality", cardinality},
          {"cardinality_ok", cardinality_ok},
          {"min_observed_separation", min_observed_separation},
          {"closest_pair", witness_json(closest)},
          {"offending_pairs", off},
          {"separation_ok", separation_ok},
          {"esup", esup.to_json()},
          {"kappa_obs", kappa_obs},
          {"kappa_stderr", kappa_std_error}};
}

SudakovReport sudakov_experiment(const ProcessSpec& process, const IndexSet& T, double p, double u,
                                 std::size_t samples, const RngStream& stream, const MetricOptions& metric) {
  if (T.size() < 2) throw DomainError("Sudakov experiment needs at least two points");
  if (!(u > 0.0)) throw DomainError("separation u must be positive");
  SudakovReport r;
  r.p = p;
  r.u = u;
  r.cardinality = T.size();
  r.cardinality_ok = std::log(static_cast<double>(T.size())) >= p;
  const auto d = distance_matrix(T, process, p, metric);
  r.min_observed_separation = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < T.size(); ++s) {
    for (std::size_t t = s + 1; t < T.size(); ++t) {
      const SeparationWitness w{s, t, d.at(s, t), d.error(s, t)};
      if (w.distance < r.min_observed_separation) {
        r.min_observed_separation = w.distance;
        r.closest = w;
      }
      if (w.distance + w.error_bound < u * (1.0 - 1e-12)) r.offending.push_back(w);
    }
  }
  r.separation_ok = r.offending.empty();
  r.esup = estimate_sup(process, T, samples, stream);
  r.kappa_obs = r.esup.mean / u;
  r.kappa_std_error = r.esup.std_error / u;
  return r;
}

// ------------------------------------------------------ index constructions

IndexSet packing_set(std::size_t m, std::size_t n) {
  if (m < 1 || m > n) throw DomainError("packing set needs 1 <= m <= n");
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  while (true) {
    std::vector<double> v(n, 0.0);
    std::string label = "{";
    for (std::size_t i = 0; i < m; ++i) {
      v[idx[i]] = 1.0;
      label += (i ? "," : "") + std::to_string(idx[i]);
    }
    pts.push_back(std::move(v));
    labels.push_back(label + "}");
    std::size_t i = m;
    while (i > 0 && idx[i - 1] == n - m + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
  return IndexSet(std::move(pts), std::move(labels));
}

PackingCount packing_count(std::size_t m, std::size_t n) {
  if (m < 1 || m > n) throw DomainError("packing set needs 1 <= m <= n");
  PackingCount c;
  c.cardinality = binomial(static_cast<unsigned>(n), static_cast<unsigned>(m));
  c.lower_bound = std::pow(static_cast<double>(n) / static_cast<double>(m), static_cast<double>(m));
  c.holds = c.cardinality >= c.lower_bound;
  return c;
}

IndexSet interleave(const IndexSet& T) {
  const std::size_t n = T.dimension();
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  pts.reserve(T.size() * T.size());
  for (std::size_t a = 0; a < T.size(); ++a) {
    for (std::size_t b = 0; b < T.size(); ++b) {
      std::vector<double> v(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        v[2 * i] = T.point(a)[i];
        v[2 * i + 1] = T.point(b)[i];
      }
      pts.push_back(std::move(v));
      labels.push_back("(" + T.label(a) + "," + T.label(b) + ")");
    }
  }
  return IndexSet(std::move(pts), std::move(labels));
}

// ---------------------------------------------------------------- two-sided

nlohmann::json TwoSidedReport::to_json() const {
  return {{"cardinality", cardinality},
          {"gamma_upper_cert", certificate.value},
          {"certificate_mode", mode_name(certificate.mode)},
          {"certificate", certificate.certificate.to_json()},
          {"certificate_level_terms", certificate.level_terms},
          {"gamma_exact", gamma_exact ? nlohmann::json(*gamma_exact) : nlohmann::json(nullptr)},
          {"esup", esup.to_json()},
          {"ratio_upper", finite_or_null(ratio_upper)},
          {"ratio_lower", finite_or_null(ratio_lower)},
          {"degenerate", degenerate},
          {"constant", kTwoSidedConstant},
          {"pass", pass}};
}

TwoSidedReport two_sided_experiment(const MetricSpace& space, std::size_t samples, const RngStream& stream,
                                    GammaMode mode) {
  TwoSidedReport r;
  r.cardinality = space.size();
  r.certificate = compute_gamma(space, Functional::gamma_x, GammaMode::greedy);
  if (mode == GammaMode::exact) {
    r.gamma_exact = compute_gamma(space, Functional::gamma_x, GammaMode::exact).value;
  } else if (space.size() <= kExactModeCap) {
    try {
      r.gamma_exact = compute_gamma(space, Functional::gamma_x, GammaMode::exact).value;
    } catch (const PreconditionError&) {
      // Monte Carlo metrics: the certificate alone is reported.
    }
  }
  r.esup = estimate_sup(space.process(), space.index_set(), samples, stream);
  const double gamma = r.gamma_reference();
  if (gamma == 0.0 && r.esup.mean == 0.0) {
    r.degenerate = true;
    r.pass = true;
    return r;
  }
  r.ratio_upper = safe_ratio(r.esup.mean, r.certificate.value);
  r.ratio_lower = safe_ratio(gamma, r.esup.mean);
  r.pass = r.ratio_upper <= kTwoSidedConstant && r.ratio_lower <= kTwoSidedConstant;
  return r;
}

// --------------------------------------------------------------- weak-strong

nlohmann::json WeakStrongReport::to_json() const {
  return {{"p", p},
          {"strong_moment", chaining::to_json(strong_moment)},
          {"strong", strong},
          {"weak_sup", chaining::to_json(weak_sup)},
          {"max_norm", max_norm},
          {"max_norm_error", max_norm_error},
          {"argmax", argmax},
          {"c_obs", c_obs},
          {"c_obs_stderr", c_obs_std_error}};
}

WeakStrongReport weak_strong_experiment(const ProcessSpec& process, const IndexSet& T, double p,
                                        std::size_t samples, const RngStream& stream, const MetricOptions& metric) {
  if (!(p >= 1.0)) throw DomainError("weak-strong experiment needs p >= 1");
  if (T.empty()) throw DomainError("weak-strong experiment over an empty index set");
  if (samples < kMinSupSamples) throw DomainError("too few samples");
  WeakStrongReport r;
  r.p = p;
  const auto est = monte_carlo_means(samples, 2, stream, [&](Rng& rng, std::span<double> out) {
    thread_local std::vector<double> x;
    x.resize(process.dimension());
    process.draw(rng, x);
    const double s = sup_statistic(extremes(T, x), SupTarget::sup_abs);
    out[0] = std::pow(s, p);
    out[1] = s;
  });
  r.strong_moment = est[0];
  r.weak_sup = est[1];
  r.strong = std::pow(r.strong_moment.mean, 1.0 / p);
  for (std::size_t t = 0; t < T.size(); ++t) {
    MetricOptions local = metric;
    local.stream = metric.stream.child(t);
    const auto n = combination_norm(process, T.point(t), p, local);
    if (n.value > r.max_norm) {
      r.max_norm = n.value;
      r.max_norm_error = n.error_bound;
      r.argmax = t;
    }
  }
  const double den = r.weak_sup.mean + r.max_norm;
  r.c_obs = safe_ratio(r.strong, den);
  const double a = relative_sigma(r.strong_moment) / p;
  const double b = den > 0.0 ? std::hypot(r.weak_sup.std_error, r.max_norm_error / 3.0) / den : 0.0;
  r.c_obs_std_error = r.c_obs * std::hypot(a, b);
  return r;
}

// ---------------------------------------------------------------- comparison

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json tails = nlohmann::json::array();
  for (const auto& t : tail) tails.push_back({{"level", t.level}, {"u", t.u}, {"prob_y", t.prob_y}});
  nlohmann::json front = nlohmann::json::array();
  for (const auto& f : frontier) {
    nlohmann::json ratios = nlohmann::json::array();
    for (double v : f.ratios) ratios.push_back(finite_or_null(v));
    front.push_back({{"c_arg", f.c_arg}, {"c_prob", finite_or_null(f.c_prob)}, {"ratios", ratios}});
  }
  return {{"p_grid", p_grid},
          {"y_scale", y_scale},
          {"max_domination_ratio", max_domination_ratio},
          {"esup_x", esup_x.to_json()},
          {"esup_y", esup_y.to_json()},
          {"ratio", finite_or_null(ratio)},
          {"ratio_stderr", ratio_std_error},
          {"quantile_levels", kTailQuantiles},
          {"tail", tails},
          {"frontier", front}};
}

ComparisonReport comparison_experiment(const ProcessSpec& x, const ProcessSpec& y, const IndexSet& T,
                                       const std::vector<double>& p_grid, std::size_t samples,
                                       const RngStream& stream, double y_scale, const MetricOptions& metric) {
  if (T.empty()) throw DomainError("comparison over an empty index set");
  if (x.dimension() != y.dimension()) throw DomainError("processes X and Y differ in dimension");
  if (p_grid.empty()) throw DomainError("comparison needs a nonempty p grid");
  if (!(y_scale >= 0.0)) throw DomainError("y_scale must be nonnegative");
  ComparisonReport r;
  r.p_grid = p_grid;
  r.y_scale = y_scale;
  const IndexSet TY = T.scaled(y_scale);
  for (double p : p_grid) {
    const auto dx = distance_matrix(T, x, p, metric);
    const auto dy = distance_matrix(TY, y, p, metric);
    for (std::size_t s = 0; s < T.size(); ++s) {
      for (std::size_t t = s + 1; t < T.size(); ++t) {
        const double a = dy.at(s, t);
        const double b = dx.at(s, t);
        if (a > b * (1.0 + 1e-12) + dx.error(s, t) + dy.error(s, t)) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "increment domination fails at (s, t, p) = (" << s << ", " << t << ", " << p
              << "): ||Y_s - Y_t||_p = " << a << " > ||X_s - X_t||_p = " << b;
          throw PreconditionError(msg.str());
        }
        if (b > 0.0) r.max_domination_ratio = std::max(r.max_domination_ratio, a / b);
      }
    }
  }
  auto xs = sup_samples(x, T, samples, stream, SupTarget::sup_increments);
  auto ys = sup_samples(y, TY, samples, stream, SupTarget::sup_increments);
  const auto mx = summarize(xs);
  const auto my = summarize(ys);
  r.esup_x = to_sup_estimate(mx, stream, SupTarget::sup_increments);
  r.esup_y = to_sup_estimate(my, stream, SupTarget::sup_increments);
  r.ratio = safe_ratio(my.mean, mx.mean);
  r.ratio_std_error = std::isfinite(r.ratio) ? r.ratio * std::hypot(relative_sigma(mx), relative_sigma(my)) : 0.0;

  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  auto tail_prob = [](const std::vector<double>& sorted, double u) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), u);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  };
  for (double q : kTailQuantiles) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(xs.size() - 1)));
    const double u = xs[idx];
    r.tail.push_back({q, u, tail_prob(ys, u)});
  }
  for (double c : kFrontierArgGrid) {
    FrontierPoint f;
    f.c_arg = c;
    for (const auto& tp : r.tail) {
      const double ratio = safe_ratio(tp.prob_y, tail_prob(xs, tp.u / c));
      f.ratios.push_back(ratio);
      f.c_prob = std::max(f.c_prob, ratio);
    }
    r.frontier.push_back(std::move(f));
  }
  return r;
}

// ------------------------------------------------------------- hull

nlohmann::json HullDecomposition::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& c : chain) {
    pts.push_back({{"k", c.k},
                   {"level", c.level},
                   {"from", c.from},
                   {"to", c.to},
                   {"step", c.step},
                   {"point", c.point},
                   {"norm_cap", c.norm_cap},
                   {"norm_error", c.norm_error},
                   {"method", method_name(c.method)}});
  }
  nlohmann::json res = nlohmann::json::array();
  for (const auto& p : residuals) res.push_back({{"s", p.s}, {"t", p.t}, {"residual", p.residual}, {"weight", p.weight}});
  return {{"chain", pts},
          {"M", m_index},
          {"skipped_steps", skipped_steps},
          {"R", R},
          {"max_step", max_step},
          {"residuals", res},
          {"max_residual", max_residual},
          {"max_norm_cap", max_norm_cap},
          {"residual_ok", residual_ok},
          {"caps_ok", caps_ok},
          {"bookkeeping_ok", bookkeeping_ok},
          {"weights_ok", weights_ok},
          {"pass", pass}};
}

HullDecomposition convex_hull_decomposition(const MetricSpace& space, const PartitionTree& tree) {
  const std::size_t m = space.size();
  if (m == 0) throw DomainError("hull decomposition of an empty index set");
  tree.validate(m);
  const IndexSet& T = space.index_set();
  const std::size_t dim = T.dimension();
  HullDecomposition h;
  h.bookkeeping_ok = true;

  // M_0 = N_0 = 1 holds s^1 = 0.
  double m_prev = 1.0;
  h.m_index.push_back(1);
  std::size_t next_k = 2;
  // chain_of[n][block] = index into h.chain, or none
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> chain_of(tree.depth());
  chain_of[0].assign(1, kNone);
  for (std::size_t n = 1; n < tree.depth(); ++n) {
    const double cap = static_cast<double>(partition_cap(static_cast<unsigned>(n)));
    const double m_n = m_prev + cap;
    h.m_index.push_back(m_n >= 1.8e19 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(m_n));
    if (std::log(m_n + 2.0) > std::ldexp(1.0, static_cast<int>(n) + 1)) h.bookkeeping_ok = false;
    const double p = std::ldexp(1.0, static_cast<int>(n) + 1);
    const auto& level = tree.level(n);
    chain_of[n].assign(level.size(), kNone);
    for (std::size_t j = 0; j < level.size(); ++j) {
      const std::size_t to = level[j].front();
      const auto& parent = tree.level(n - 1)[tree.block_of(n - 1, to)];
      const std::size_t from = parent.front();
      const double step = from == to ? 0.0 : space.distance(from, to, p);
      if (step <= 0.0) {
        ++h.skipped_steps;
        continue;
      }
      ChainPoint c;
      c.k = next_k++;
      c.level = static_cast<unsigned>(n);
      c.from = from;
      c.to = to;
      c.step = step;
      c.point.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) c.point[i] = (T.point(to)[i] - T.point(from)[i]) / step;
      if (static_cast<double>(c.k) > m_n) h.bookkeeping_ok = false;
      MetricOptions opts = space.options();
      opts.stream = opts.stream.child(0x68756c6cULL + c.k);
      const auto norm = combination_norm(space.process(), c.point, std::log(static_cast<double>(c.k) + 2.0), opts);
      c.norm_cap = norm.value;
      c.norm_error = norm.error_bound;
      c.method = norm.method;
      h.max_step = std::max(h.max_step, step);
      h.max_norm_cap = std::max(h.max_norm_cap, c.norm_cap);
      chain_of[n][j] = h.chain.size();
      h.chain.push_back(std::move(c));
    }
    m_prev = m_n;
  }

  // Telescoped path of each point: sum over levels of step * s^k.
  std::vector<std::vector<double>> path(m, std::vector<double>(dim, 0.0));
  std::vector<double> mass(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t n = 1; n < tree.depth(); ++n) {
      const std::size_t c = chain_of[n][tree.block_of(n, t)];
      if (c == kNone) continue;
      const auto& cp = h.chain[c];
      for (std::size_t i = 0; i < dim; ++i) path[t][i] += cp.step * cp.point[i];
      mass[t] += cp.step;
    }
  }
  const double sup_mass = m > 0 ? *std::max_element(mass.begin(), mass.end()) : 0.0;
  h.R = 2.0 * sup_mass;
  h.weights_ok = true;
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t t = s + 1; t < m; ++t) {
      PairResidual pr{s, t, 0.0, mass[s] + mass[t]};
      for (std::size_t i = 0; i < dim; ++i) {
        const double want = T.point(s)[i] - T.point(t)[i];
        pr.residual = std::max(pr.residual, std::abs(want - (path[s][i] - path[t][i])));
      }
      h.max_residual = std::max(h.max_residual, pr.residual);
      if (pr.weight > h.R * (1.0 + 1e-12)) h.weights_ok = false;
      h.residuals.push_back(pr);
    }
  }
  h.residual_ok = h.max_residual <= kHullResidualTolerance;
  h.caps_ok = std::all_of(h.chain.begin(), h.chain.end(), [](const ChainPoint& c) {
    return c.norm_cap <= 1.0 + kHullCapTolerance + c.norm_error;
  });
  h.pass = h.residual_ok && h.caps_ok && h.bookkeeping_ok && h.weights_ok && std::isfinite(h.R) &&
           h.R >= 2.0 * h.max_step * (1.0 - 1e-15);
  return h;
}

// ----------------------------------------------------- packing-set chain

nlohmann::json PackingChainReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : order_stats) {
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& [q, b] : r.bounds) bounds.push_back({{"q", q}, {"bound", b}});
    rows.push_back({{"k", r.k}, {"value", chaining::to_json(r.value)}, {"bounds", bounds}});
  }
  return {{"m", m},
          {"n", n},
          {"esup", esup.to_json()},
          {"top_sum", chaining::to_json(top_sum)},
          {"combined_stderr", combined_std_error},
          {"chain_pass", chain_pass},
          {"order_stats", rows},
          {"bound_violations", bound_violations},
          {"pass", pass}};
}

PackingChainReport packing_chain_experiment(const DistributionModel& model, std::size_t m, std::size_t n,
                                            std::size_t samples, const RngStream& stream,
                                            const std::vector<double>& qs) {
  const IndexSet T = packing_set(m, n);
  const auto proc = ProcessSpec::iid(model, n);
  if (samples < kMinSupSamples) throw DomainError("too few samples");
  PackingChainReport r;
  r.m = m;
  r.n = n;
  const auto est = monte_carlo_means(samples, 2, stream, [&](Rng& rng, std::span<double> out) {
    thread_local std::vector<double> x;
    thread_local std::vector<double> a;
    x.resize(n);
    proc.draw(rng, x);
    out[0] = sup_statistic(extremes(T, x), SupTarget::sup_increments);
    a.resize(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(x[i]);
    std::partial_sort(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(m), a.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a[i];
    out[1] = s;
  });
  r.esup = to_sup_estimate(est[0], stream, SupTarget::sup_increments);
  r.top_sum = est[1];
  r.combined_std_error = std::hypot(est[0].std_error, 2.0 * est[1].std_error);
  r.chain_pass = r.esup.mean <= 2.0 * r.top_sum.mean + 3.0 * r.combined_std_error;
  std::vector<std::size_t> ks(n);
  for (std::size_t k = 0; k < n; ++k) ks[k] = k + 1;
  r.order_stats = order_stat_means(model, n, ks, samples, stream.child(1), qs);
  for (const auto& row : r.order_stats) {
    for (const auto& [q, b] : row.bounds) {
      if (row.value.mean > b + 3.0 * row.value.std_error) ++r.bound_violations;
    }
  }
  r.pass = r.chain_pass && r.bound_violations == 0;
  return r;
}

// ---------------------------------------------------- interleaving chain

nlohmann::json InterleaveReport::to_json() const {
  return {{"p", p},
          {"u", u},
          {"base_cardinality", base_cardinality},
          {"cardinality", cardinality},
          {"min_base_separation", min_base_separation},
          {"min_separation", min_separation},
          {"k", k},
          {"block", block},
          {"block_diameter", block_diameter},
          {"gamma", gamma},
          {"mode", mode_name(mode)},
          {"esup_base", esup_base.to_json()},
          {"esup", esup.to_json()},
          {"chain_pass", chain_pass},
          {"esup_pass", esup_pass},
          {"pass", pass}};
}

InterleaveReport interleave_experiment(const ProcessSpec& process, const IndexSet& T, double p, double u,
                                       std::size_t samples, const RngStream& stream) {
  if (T.empty()) throw DomainError("interleave experiment over an empty index set");
  if (!(p >= 1.0)) throw DomainError("interleave experiment needs p >= 1");
  InterleaveReport r;
  r.p = p;
  r.u = u;
  r.base_cardinality = T.size();
  const IndexSet TT = interleave(T);
  r.cardinality = TT.size();
  std::vector<DistributionModel> doubled;
  for (const auto& mdl : process.models()) {
    doubled.push_back(mdl);
    doubled.push_back(mdl);
  }
  const ProcessSpec proc2(std::move(doubled));
  const MetricSpace base(T, process);
  const MetricSpace space(TT, proc2);
  auto min_sep = [p](const MetricSpace& s) {
    double best = std::numeric_limits<double>::infinity();
    const auto& d = s.matrix(p);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) best = std::min(best, d.at(i, j));
    return best;
  };
  r.min_base_separation = min_sep(base);
  r.min_separation = min_sep(space);
  r.k = static_cast<unsigned>(std::floor(std::log2(p)));
  r.mode = TT.size() <= kExactModeCap ? GammaMode::exact : GammaMode::greedy;
  const auto g = compute_gamma(space, Functional::gamma_x, r.mode);
  r.gamma = g.value;
  if (r.k < g.certificate.depth()) {
    for (const auto& b : g.certificate.level(r.k)) {
      if (b.size() >= 2) {
        r.block = b;
        break;
      }
    }
  }
  if (!r.block.empty()) {
    r.block_diameter = space.block_diameter(r.block, std::ldexp(1.0, static_cast<int>(r.k)));
    r.chain_pass = u <= r.block_diameter * (1.0 + 1e-12) && r.block_diameter <= r.gamma * (1.0 + 1e-12);
  }
  r.esup_base = estimate_sup(process, T, samples, stream);
  r.esup = estimate_sup(proc2, TT, samples, stream.child(1));
  r.esup_pass = r.esup.mean <= 2.0 * r.esup_base.mean + 3.0 * std::hypot(r.esup.std_error, 2.0 * r.esup_base.std_error);
  r.pass = r.chain_pass && r.esup_pass;
  return r;
}

}  // namespace chaining
