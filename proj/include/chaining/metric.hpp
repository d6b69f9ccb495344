// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaining/dist.hpp"
#include "chaining/rng.hpp"

namespace chaining {

// Canonical process X_t = sum_i t_i X_i with independent standardized X_i.
class ProcessSpec {
 public:
  explicit ProcessSpec(std::vector<DistributionModel> models);
  static ProcessSpec iid(const DistributionModel& model, std::size_t dimension);

  std::size_t dimension() const { return models_.size(); }
  const DistributionModel& model(std::size_t i) const { return models_.at(i); }
  const std::vector<DistributionModel>& models() const { return models_; }
  bool all_of(Family family) const;

  // Fills out[i] with a draw of X_i.
  void draw(Rng& rng, std::span<double> out) const;

  nlohmann::json to_json() const;

 private:
  std::vector<DistributionModel> models_;
};

// Finite T in R^n. Keeps a sparse copy of each point for fast inner products.
class IndexSet {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
  };

  IndexSet(std::vector<std::vector<double>> points, std::vector<std::string> labels = {});

  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return dimension_; }
  bool empty() const { return points_.empty(); }
  const std::vector<double>& point(std::size_t i) const { return points_.at(i); }
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Entry>& support(std::size_t i) const { return sparse_.at(i); }

  // <t_i, x>
  double inner(std::size_t i, std::span<const double> x) const;

  IndexSet subset(const std::vector<std::size_t>& indices) const;
  IndexSet scaled(double factor) const;

  nlohmann::json to_json() const;

 private:
  std::vector<std::vector<double>> points_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Entry>> sparse_;
  std::size_t dimension_ = 0;
};

enum class NormMethod { closed_form, enumeration, quadrature, monte_carlo, bracket };
enum class MethodChoice { automatic, closed_form, enumeration, quadrature, monte_carlo };

std::string method_name(NormMethod method);

struct MetricOptions {
  MethodChoice method = MethodChoice::automatic;
  std::size_t mc_samples = 100000;
  RngStream stream{0x6d65747269637300ULL, 0};
};

// value = ||X_s - X_t||_p; error_bound is 0 for exact methods and three
// delta-method standard errors for Monte Carlo.
struct IncrementNormResult {
  double value = 0.0;
  double error_bound = 0.0;
  NormMethod method = NormMethod::closed_form;
};

// Largest number of nonzero coordinates accepted by forced enumeration.
inline constexpr std::size_t kForcedEnumerationCap = 24;
// Largest number of support patterns enumerated automatically (2^20).
inline constexpr double kAutoEnumerationPatterns = 1048576.0;
// Largest p accepted by the Monte Carlo norm.
inline constexpr double kMonteCarloMaxP = 128.0;

// ||sum_i a_i X_i||_p. Automatic selection, in order: p = 2 or a single
// coordinate or all-gaussian (closed form); finite laws with at most 2^20
// patterns (enumeration); even integer p <= 128 (exact moment expansion,
// reported as closed form); p < 2 with closed-form characteristic functions
// (quadrature); otherwise Monte Carlo.
IncrementNormResult combination_norm(const ProcessSpec& process, std::span<const double> coeffs, double p,
                                     const MetricOptions& options = {});

IncrementNormResult increment_norm(const ProcessSpec& process, std::span<const double> s, std::span<const double> t,
                                   double p, const MetricOptions& options = {});

// All pairwise d_p on T. Entry (i, j) uses stream options.stream.child(pair id)
// when Monte Carlo is needed, so the matrix is independent of scheduling.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t n, double p);
  std::size_t size() const { return n_; }
  double p() const { return p_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double error(std::size_t i, std::size_t j) const { return errors_[i * n_ + j]; }
  NormMethod method(std::size_t i, std::size_t j) const { return methods_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, const IncrementNormResult& r);
  bool exact() const;
  double max_error() const;

 private:
  std::size_t n_;
  double p_;
  std::vector<double> values_;
  std::vector<double> errors_;
  std::vector<NormMethod> methods_;
};

// d_p between points i and j of T with the Monte Carlo stream used by distance_matrix.
IncrementNormResult pair_distance(const IndexSet& T, const ProcessSpec& process, std::size_t i, std::size_t j,
                                  double p, const MetricOptions& options = {});

DistanceMatrix distance_matrix(const IndexSet& T, const ProcessSpec& process, double p,
                               const MetricOptions& options = {});

// Square CSV with a header row and a label column.
std::string distance_matrix_csv(const DistanceMatrix& matrix, const IndexSet& T);

// Delta_p(T): largest pairwise d_p; 0 for a singleton.
double diameter(const IndexSet& T, const ProcessSpec& process, double p, const MetricOptions& options = {});

// Index sets up to this size keep full distance matrices; larger ones compute
// distances on demand unless matrix(p) was requested explicitly.
inline constexpr std::size_t kMatrixCacheLimit = 2048;

// Lazily computed, cached distance matrices of one (T, process) pair.
class MetricSpace {
 public:
  MetricSpace(IndexSet T, ProcessSpec process, MetricOptions options = {});

  const IndexSet& index_set() const { return T_; }
  const ProcessSpec& process() const { return process_; }
  const MetricOptions& options() const { return options_; }
  std::size_t size() const { return T_.size(); }

  const DistanceMatrix& matrix(double p) const;
  double distance(std::size_t i, std::size_t j, double p) const;
  // Largest d_p between members of block.
  double block_diameter(std::span<const std::size_t> block, double p) const;

 private:
  bool cached(double p) const;

  IndexSet T_;
  ProcessSpec process_;
  MetricOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const DistanceMatrix>> cache_;
};

// inf{u > 0 : prod_i E|1 + a_i X_i / u|^r <= e^r} for even r, via the even
// moment expansion of each factor and bisection to relative 1e-10.
double latala_norm(std::span<const double> coeffs, const ProcessSpec& process, int r);

}  // namespace chaining
