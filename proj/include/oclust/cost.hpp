#pragma once

// Outlier-trimmed clustering costs. Every function is pure; tie-breaks are
// fixed so repeated calls are bit-identical.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "oclust/metric.hpp"

namespace oclust {

/// d^z with the z = 1 and z = 2 paths computed without std::pow.
inline double power(double d, double z) {
  if (z == 1.0) return d;
  if (z == 2.0) return d * d;
  return std::pow(d, z);
}

/// Sum of the |values| - m smallest values. The kept values are added in
/// their original order.
double summ(std::span<const double> values, std::size_t m);

double distance_to_set(const DistanceOracle& metric, PointId p, std::span<const PointId> centers);

/// d(p, C)^z.
double point_cost(const DistanceOracle& metric, PointId p, std::span<const PointId> centers, double z);

/// Sum of d(p, C)^z over X after dropping the m largest terms.
double cost_m(const DistanceOracle& metric, std::span<const PointId> points,
              std::span<const PointId> centers, std::size_t m, double z);

/// Weighted variant: each entry contributes the single value d(p, C)^z * w(p);
/// the t largest values are dropped whole.
double wcost_t(const DistanceOracle& metric, const WeightedPointSet& points,
               std::span<const PointId> centers, std::size_t t, double z);

/// The m points trimmed by cost_m. Selection keeps lower ids on ties (the
/// evicted point is the one with the higher id); the result is ordered by
/// cost descending, then id ascending.
std::vector<PointId> farthest_m(const DistanceOracle& metric, std::span<const PointId> points,
                                std::span<const PointId> centers, std::size_t m, double z);

double diam(const DistanceOracle& metric, std::span<const PointId> points);

/// min over p in S, c in C of d(p, c).
double set_dist(const DistanceOracle& metric, std::span<const PointId> points,
                std::span<const PointId> centers);

/// Outlier-trimmed cost and the trimmed points. With `colors` empty this is
/// cost_m / farthest_m with budget m; otherwise clients are grouped by color
/// (aligned with `clients`) and class t drops its own budgets[t] farthest
/// points. Outliers are listed by color, each class in farthest_m order.
struct TrimmedEvaluation {
  double cost = 0.0;
  std::vector<PointId> outliers;
};

TrimmedEvaluation evaluate_trimmed(const DistanceOracle& metric, std::span<const PointId> clients,
                                   std::span<const PointId> centers, double z, std::size_t m,
                                   std::span<const std::uint32_t> colors = {},
                                   std::span<const std::size_t> budgets = {});

/// Sum of `values` after dropping the m largest under (value, id); kept values
/// are added in their original order. cost_m and the exact oracles share it.
double trimmed_sum(std::span<const double> values, std::span<const std::uint64_t> ids, std::size_t m);

/// Indices of the `drop` largest values under the key (value, tiebreak)
/// ascending, returned in (value descending, tiebreak ascending) order.
std::vector<std::size_t> largest_indices(std::span<const double> values,
                                         std::span<const std::uint64_t> tiebreak, std::size_t drop);

}  // namespace oclust
