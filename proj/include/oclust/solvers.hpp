#pragma once

// Outlier-free k-median / (k,z) solvers used as the black box of the
// reduction, and exact brute-force oracles for instances with outliers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oclust/matroid.hpp"
#include "oclust/metric.hpp"

namespace oclust {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 5'000'000;

/// An exact solver refused because its enumeration exceeds the budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverKind { exact, local_search };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

struct SolverHandle {
  SolverKind kind = SolverKind::exact;
  std::size_t iteration_cap = 10'000;
  /// A swap is taken only if it lowers the cost below (1 - threshold) * current.
  double improvement_threshold = 1e-3;
  std::uint64_t enumeration_budget = kDefaultEnumerationBudget;
  std::size_t restarts = 0;
  std::uint64_t seed = 0;

  /// 1 for exact, 5 for single-swap local search on k-median, nullopt
  /// (heuristic) otherwise.
  std::optional<double> beta_guarantee(double z) const;
};

/// Admissible center sets: every subset of F of size min(k, |F|), or every
/// basis of a matroid restricted to F.
class CenterConstraint {
 public:
  static CenterConstraint cardinality(std::size_t k);
  static CenterConstraint independent_in(std::shared_ptr<const Matroid> matroid);

  bool is_cardinality() const { return matroid_ == nullptr; }
  std::size_t k() const { return k_; }
  const std::shared_ptr<const Matroid>& matroid() const { return matroid_; }

  bool admits(std::span<const PointId> centers) const;
  /// Size of the sets enumerated over `facilities`.
  std::size_t target_size(std::span<const PointId> facilities) const;

 private:
  std::size_t k_ = 1;
  std::shared_ptr<const Matroid> matroid_;
};

struct CenterResult {
  std::vector<PointId> centers;  // ascending ids
  double cost = 0.0;             // weighted outlier-free cost
  bool converged = true;
  std::size_t iterations = 0;
};

/// w(x) copies of every entry x.
std::vector<PointId> expand_unweighted(const WeightedPointSet& points);

/// Visits every admissible center set (as indices into the sorted, deduplicated
/// facility list) in lexicographic order. Throws BudgetExceeded when the
/// number of sets exceeds `budget`.
void for_each_center_set(std::span<const PointId> sorted_facilities, const CenterConstraint& constraint,
                         std::uint64_t budget,
                         const std::function<void(std::span<const std::size_t>)>& visit);

/// Number of sets for_each_center_set would visit, saturating at budget + 1.
std::uint64_t count_center_sets(std::span<const PointId> sorted_facilities, const CenterConstraint& constraint,
                                std::uint64_t budget);

std::vector<PointId> sorted_unique(std::span<const PointId> points);

/// argmin over C of the weighted outlier-free cost; ties go to the
/// lexicographically smallest center-id tuple.
CenterResult exact_kmedian(const DistanceOracle& metric, const WeightedPointSet& points,
                           std::span<const PointId> facilities, std::size_t k, double z,
                           std::uint64_t budget = kDefaultEnumerationBudget);

CenterResult exact_constrained(const DistanceOracle& metric, const WeightedPointSet& points,
                               std::span<const PointId> facilities, const CenterConstraint& constraint,
                               double z, std::uint64_t budget = kDefaultEnumerationBudget);

/// Single-swap local search started from `initial` (or the first admissible
/// set by facility id). `converged` is false when the iteration cap stopped it.
CenterResult local_search_kmedian(const DistanceOracle& metric, const WeightedPointSet& points,
                                  std::span<const PointId> facilities, std::size_t k, double z,
                                  const SolverHandle& handle, std::span<const PointId> initial = {});

CenterResult local_search_constrained(const DistanceOracle& metric, const WeightedPointSet& points,
                                      std::span<const PointId> facilities, const CenterConstraint& constraint,
                                      double z, const SolverHandle& handle,
                                      std::span<const PointId> initial = {});

/// Dispatch on handle.kind.
CenterResult solve_outlier_free(const DistanceOracle& metric, const WeightedPointSet& points,
                                std::span<const PointId> facilities, const CenterConstraint& constraint,
                                double z, const SolverHandle& handle);

/// Brute-force optimum with outliers: every admissible center set, trimmed
/// per color class (one class with budget inst.m when `client_colors` is
/// empty). Outliers are the per-class farthest points.
Solution exact_constrained_outlier_oracle(const MetricInstance& inst, const CenterConstraint& constraint,
                                          std::span<const std::uint32_t> client_colors,
                                          std::span<const std::size_t> color_budgets,
                                          std::uint64_t budget = kDefaultEnumerationBudget);

/// OPT(I) by enumerating all center sets of size k.
Solution exact_outlier_oracle(const MetricInstance& inst, std::uint64_t budget = kDefaultEnumerationBudget);

}  // namespace oclust
