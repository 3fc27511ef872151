#pragma once

// Variants of the reduction: (k,z)-clustering, colorful outlier budgets,
// matroid-constrained centers, and the colorful matroid combination.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "oclust/matroid.hpp"
#include "oclust/metric.hpp"
#include "oclust/reduction.hpp"
#include "oclust/solvers.hpp"

namespace oclust {

/// Clients split into colors 0..l-1, each with its own outlier budget.
struct ColorfulInstance {
  MetricInstance base;
  std::vector<std::uint32_t> colors;  // aligned with base.clients
  std::vector<std::size_t> budgets;   // sum equals base.m

  void validate() const;
  std::size_t color_count() const { return budgets.size(); }
  OutlierProblem problem(std::shared_ptr<const Matroid> matroid = nullptr) const;
};

/// The base pipeline with z-powered costs; z = 1 is solve_with_outliers.
ReductionReport kz_solve_with_outliers(const MetricInstance& inst, const ReductionOptions& options);

ReductionReport colorful_solve(const ColorfulInstance& inst, const ReductionOptions& options);

/// Centers must be independent in `matroid` (a matroid over the facilities);
/// inst.k is ignored. Needs facilities and clients to be distinct ids.
ReductionReport matroid_median_solve(const MetricInstance& inst, std::shared_ptr<const Matroid> matroid,
                                     const ReductionOptions& options);

ReductionReport colorful_matroid_solve(const ColorfulInstance& inst, std::shared_ptr<const Matroid> matroid,
                                       const ReductionOptions& options);

/// Brute-force optima: every admissible center set, per-color trimming.
Solution colorful_oracle(const ColorfulInstance& inst, std::uint64_t budget = kDefaultEnumerationBudget);
Solution matroid_oracle(const MetricInstance& inst, std::shared_ptr<const Matroid> matroid,
                        std::uint64_t budget = kDefaultEnumerationBudget);
Solution colorful_matroid_oracle(const ColorfulInstance& inst, std::shared_ptr<const Matroid> matroid,
                                 std::uint64_t budget = kDefaultEnumerationBudget);

/// d(p, q)^z <= 2^(z-1) (d(p, r)^z + d(r, q)^z), with a relative slack for
/// rounding.
bool relaxed_triangle_holds(const DistanceOracle& metric, PointId p, PointId q, PointId r, double z,
                            double relative_tolerance = 1e-12);

}  // namespace oclust
