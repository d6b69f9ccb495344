// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaining/numerics.hpp"

namespace chaining {

// A nondecreasing map t -> N(t) in [0, inf], typically N(t) = -ln P(|X| > t).
// Values are +inf at and beyond support_bound() when the support is bounded.
// Cheap to copy; the representation is shared and immutable.
class TailFunction {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual double value(double t) const = 0;
    virtual double support_bound() const { return kInf; }
    // inf{t >= 0 : N(t) >= level}; the default bisects value().
    virtual double inverse(double level) const;
    virtual std::string representation() const = 0;
  };

  using Evaluator = std::function<double(double)>;

  // N given in closed form. support_bound is inf{t : N(t) = inf}.
  static TailFunction analytic(Evaluator evaluator, double support_bound = kInf,
                               std::string label = "analytic");

  // Piecewise-linear interpolation through (t_i, N_i); t must start at 0 and
  // increase strictly, N must be finite and nondecreasing. Beyond the last knot
  // the final slope is continued.
  static TailFunction interpolated(std::vector<double> t, std::vector<double> n);

  static TailFunction from_impl(std::shared_ptr<const Impl> impl);

  TailFunction() = default;

  double operator()(double t) const;
  double support_bound() const { return impl_->support_bound(); }
  double inverse(double level) const { return impl_->inverse(level); }
  std::string representation() const { return impl_->representation(); }
  bool valid() const { return impl_ != nullptr; }

  // (t, N(t)) on the supplied grid.
  std::vector<std::pair<double, double>> tabulate(std::span<const double> grid) const;

 private:
  explicit TailFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// count points spaced evenly in log between lo and hi inclusive (lo > 0).
std::vector<double> log_grid(double lo, double hi, std::size_t count);

}  // namespace chaining
