// SPDX-License-Identifier: Apache-2.0
#include "chaining/tail_function.hpp"

#include <algorithm>
#include <cmath>

#include "chaining/errors.hpp"

namespace chaining {

double TailFunction::Impl::inverse(double level) const {
  if (level <= value(0.0)) return 0.0;
  const double bound = support_bound();
  double lo = 0.0;
  double hi = 1.0;
  while (value(hi) < level) {
    lo = hi;
    if (std::isfinite(bound) && hi >= bound) break;
    hi = std::isfinite(bound) ? std::min(2.0 * hi, bound) : 2.0 * hi;
    if (hi > 1e300) return kInf;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) >= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

class AnalyticTail final : public TailFunction::Impl {
 public:
  AnalyticTail(TailFunction::Evaluator f, double bound, std::string label)
      : f_(std::move(f)), bound_(bound), label_(std::move(label)) {}
  double value(double t) const override { return t >= bound_ ? kInf : f_(t); }
  double support_bound() const override { return bound_; }
  std::string representation() const override { return label_; }

 private:
  TailFunction::Evaluator f_;
  double bound_;
  std::string label_;
};

class InterpolatedTail final : public TailFunction::Impl {
 public:
  InterpolatedTail(std::vector<double> t, std::vector<double> n) : t_(std::move(t)), n_(std::move(n)) {}

  double value(double t) const override {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) {
      const std::size_t k = t_.size() - 1;
      const double slope = (n_[k] - n_[k - 1]) / (t_[k] - t_[k - 1]);
      return n_[k] + slope * (t - t_[k]);
    }
    const std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
    return n_[lo] + w * (n_[hi] - n_[lo]);
  }

  std::string representation() const override { return "interpolated"; }

 private:
  std::vector<double> t_;
  std::vector<double> n_;
};

}  // namespace

TailFunction TailFunction::analytic(Evaluator evaluator, double support_bound, std::string label) {
  return TailFunction(std::make_shared<AnalyticTail>(std::move(evaluator), support_bound, std::move(label)));
}

TailFunction TailFunction::interpolated(std::vector<double> t, std::vector<double> n) {
  if (t.size() != n.size() || t.size() < 2) throw DomainError("tail table needs at least two matching (t, N) knots");
  if (t.front() != 0.0) throw DomainError("tail table must start at t = 0");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(n[i]) || n[i] < 0.0) throw DomainError("tail table values must be finite and nonnegative");
    if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("tail table abscissae must increase strictly");
    if (i > 0 && n[i] < n[i - 1]) throw DomainError("tail table values must be nondecreasing");
  }
  if (n.back() == n[n.size() - 2]) throw DomainError("tail table must end strictly increasing");
  return TailFunction(std::make_shared<InterpolatedTail>(std::move(t), std::move(n)));
}

TailFunction TailFunction::from_impl(std::shared_ptr<const Impl> impl) { return TailFunction(std::move(impl)); }

double TailFunction::operator()(double t) const {
  if (t < 0.0) throw DomainError("tail function evaluated at negative t");
  return impl_->value(t);
}

std::vector<std::pair<double, double>> TailFunction::tabulate(std::span<const double> grid) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double t : grid) out.emplace_back(t, (*this)(t));
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw DomainError("log_grid needs 0 < lo <= hi and count > 0");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

}  // namespace chaining
