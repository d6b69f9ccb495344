// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chaining/dist.hpp"
#include "chaining/tail_function.hpp"

namespace chaining {

class ProcessSpec;

// Constants of the log-concave envelope for moments growing alpha-regularly:
//   kappa = 4 e^2 alpha^3 / (e - 1),  b = ln(e (2 alpha)^2),
//   T = kappa t0 = 4 e alpha^3,       L = kappa^2,  t0 = 1 - 1/e.
struct RegularityConstants {
  double alpha = 1.0;
  double kappa_alpha = 0.0;
  double b_alpha = 0.0;
  double T_alpha = 0.0;
  double L_alpha = 0.0;
  double t0 = 0.0;
};

RegularityConstants regularity_constants(double alpha);

// First (lambda, t) on the check grid with f(c lambda t) < lambda f(t), if any.
// lambda ranges over {1, 2, 4, 8}; t over a log grid of [max(t0, tiny), upper / (8c)].
struct SublinearityViolation {
  double lambda = 0.0;
  double t = 0.0;
};
std::optional<SublinearityViolation> find_sublinearity_violation(const TailFunction& f, double c, double t0,
                                                                 double upper);

// g(t) = int_{c t0}^t sup_{c t0 <= y <= x} f(y/c)/y dx for t >= c t0 and 0 below.
// The running supremum is taken on a log grid with points_per_decade points per
// decade up to `upper`, the integral by trapezoid, and g is linear beyond
// `upper`. The result is exactly convex on [c t0, inf). Throws
// PreconditionError if f(c lambda t) >= lambda f(t) fails on the check grid.
TailFunction convex_minorant(const TailFunction& f, double c, double t0, double upper,
                             std::size_t points_per_decade = 4096);

// Grid reach of an envelope built for alpha.
double envelope_upper_bound(const RegularityConstants& k);

// Convex M with M = 0 on [0, T_alpha] and M(t) <= N(t) <= M(L_alpha t) for
// t >= T_alpha. Throws PreconditionError (with the witness) if the model is
// not alpha-regular on the default grid.
TailFunction log_concave_envelope(const DistributionModel& model, double alpha);

struct SandwichRow {
  double t = 0.0;
  double n = 0.0;          // N(t)
  double m = 0.0;          // M(t)
  double m_shifted = 0.0;  // M(L_alpha t)
};
struct SandwichReport {
  std::vector<SandwichRow> rows;
  std::size_t violations = 0;
  double worst_slack = 0.0;  // min over rows of min(N - M, M(L t) - N); +inf rows skipped
};
// Evaluates M <= N <= M(L t) on the given grid with the given absolute slack.
SandwichReport check_sandwich(const TailFunction& n, const TailFunction& m, double dilation,
                              const std::vector<double>& grid, double slack = 1e-8);

struct GrowthConstant {
  double C = 0.0;
  int k = 0;
};
// k is the least integer with 2^(k-2) >= r; C = (ln 2 + 2 beta^k ln(2 alpha)) / ln 2.
GrowthConstant growth_constant(double alpha, double beta, double r);

// Upper bound 2 (ln 2 + 2 beta^k ln(2 alpha)) on N(s) for s < 2^(k-1), valid
// for every model in R_alpha and S_beta.
double tail_cap(double alpha, double beta, int k);

struct ModerateGrowthResult {
  bool pass = false;
  double worst_ratio = 0.0;
  double worst_t = 0.0;
  std::vector<double> grid;
};
// Checks N(r t) <= C N(t) on a 512-point log grid of [t_min, t_max].
ModerateGrowthResult check_moderate_growth(const TailFunction& n, double r, double C, double t_min,
                                           double t_max = 0.0);

// One coupled draw of the surrogate variables of a coordinate. All values
// share the sign and the exponential variate, so |y| >= |x_tilde| >= |x| and
// |x_tilde| >= |y| / L_alpha hold pathwise.
struct CoupledDraw {
  double x = 0.0;
  double x_tilde = 0.0;
  double y = 0.0;
  double u = 0.0;
  double z = 0.0;
};

struct SurrogateCoordinate {
  DistributionModel model;
  TailFunction envelope;        // M_i
  TailFunction clipped_tail;    // tail of X~_i: 0 below T_alpha, N_i above
  TailFunction u_tail;          // -ln P(|U_i| > t)
  TailFunction moderate_tail;   // M~_i: lambda t on [0, t_alpha], M_i beyond
  double lambda = 0.0;          // M_i(t_alpha) / t_alpha
  double p = 0.0;               // exp(-M_i(t_alpha))
  double envelope_at_t_alpha = 0.0;
};

class SurrogateFamily {
 public:
  SurrogateFamily(RegularityConstants constants, double beta, double t_alpha, double gamma, double gamma_tilde,
                  std::vector<SurrogateCoordinate> coordinates);

  const RegularityConstants& constants() const { return constants_; }
  double beta() const { return beta_; }
  double t_alpha() const { return t_alpha_; }
  double gamma() const { return gamma_; }
  double gamma_tilde() const { return gamma_tilde_; }
  std::size_t size() const { return coordinates_.size(); }
  const SurrogateCoordinate& coordinate(std::size_t i) const { return coordinates_.at(i); }

  CoupledDraw draw(std::size_t i, Rng& rng) const;

  // (t_alpha / M(t_alpha)) (1 - exp(-M(t_alpha))), a lower bound on E|Z_i|.
  double z_abs_mean_lower_bound(std::size_t i) const;

 private:
  RegularityConstants constants_;
  double beta_;
  double t_alpha_;
  double gamma_;
  double gamma_tilde_;
  std::vector<SurrogateCoordinate> coordinates_;
};

// t_alpha = L_alpha max{2, T_alpha}; gamma = C(alpha, beta, 2 L_alpha).
SurrogateFamily build_surrogates(const ProcessSpec& process, double alpha, double beta);

// Two-column CSV "t,N" at 17 significant digits.
std::string tail_to_csv(const TailFunction& tail, const std::vector<double>& grid);

}  // namespace chaining
