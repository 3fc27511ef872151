#include "oclust/cost.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oclust {

namespace {

std::vector<std::uint64_t> positional_tiebreak(std::size_t n) {
  std::vector<std::uint64_t> t(n);
  std::iota(t.begin(), t.end(), std::uint64_t{0});
  return t;
}

double sum_kept(std::span<const double> values, std::span<const std::size_t> dropped) {
  std::vector<char> drop(values.size(), 0);
  for (std::size_t i : dropped) drop[i] = 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!drop[i]) sum += values[i];
  }
  return sum;
}

void require_centers(std::span<const PointId> centers) {
  if (centers.empty()) throw std::domain_error("center set must be nonempty");
}

}  // namespace

std::vector<std::size_t> largest_indices(std::span<const double> values,
                                         std::span<const std::uint64_t> tiebreak, std::size_t drop) {
  if (drop > values.size()) throw std::domain_error("cannot drop more values than available");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Larger value first; among equal values the larger tiebreak key is evicted first.
  auto evict_first = [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return tiebreak[a] > tiebreak[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(drop), order.end(), evict_first);
  order.resize(drop);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return tiebreak[a] < tiebreak[b];
  });
  return order;
}

double trimmed_sum(std::span<const double> values, std::span<const std::uint64_t> ids, std::size_t m) {
  if (m > values.size()) throw std::domain_error("trimmed_sum: m exceeds the number of values");
  if (m == 0) return sum_kept(values, {});
  return sum_kept(values, largest_indices(values, ids, m));
}

double summ(std::span<const double> values, std::size_t m) {
  if (m > values.size()) throw std::domain_error("summ: m exceeds the number of values");
  if (m == values.size()) return 0.0;
  const auto tiebreak = positional_tiebreak(values.size());
  const auto dropped = largest_indices(values, tiebreak, m);
  return sum_kept(values, dropped);
}

double distance_to_set(const DistanceOracle& metric, PointId p, std::span<const PointId> centers) {
  require_centers(centers);
  double best = std::numeric_limits<double>::infinity();
  for (PointId c : centers) best = std::min(best, metric.distance(p, c));
  return best;
}

double point_cost(const DistanceOracle& metric, PointId p, std::span<const PointId> centers, double z) {
  return power(distance_to_set(metric, p, centers), z);
}

double cost_m(const DistanceOracle& metric, std::span<const PointId> points,
              std::span<const PointId> centers, std::size_t m, double z) {
  require_centers(centers);
  if (m > points.size()) throw std::domain_error("cost_m: m exceeds the number of points");
  std::vector<double> costs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) costs[i] = point_cost(metric, points[i], centers, z);
  std::vector<std::uint64_t> ids(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) ids[i] = index_of(points[i]);
  return trimmed_sum(costs, ids, m);
}

double wcost_t(const DistanceOracle& metric, const WeightedPointSet& points,
               std::span<const PointId> centers, std::size_t t, double z) {
  require_centers(centers);
  if (t > points.size()) throw std::domain_error("wcost_t: t exceeds the number of entries");
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& e = points.entries[i];
    values[i] = point_cost(metric, e.point, centers, z) * static_cast<double>(e.weight);
  }
  return summ(values, t);
}

std::vector<PointId> farthest_m(const DistanceOracle& metric, std::span<const PointId> points,
                                std::span<const PointId> centers, std::size_t m, double z) {
  require_centers(centers);
  if (m > points.size()) throw std::domain_error("farthest_m: m exceeds the number of points");
  if (m == 0) return {};
  std::vector<double> costs(points.size());
  std::vector<std::uint64_t> ids(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    costs[i] = point_cost(metric, points[i], centers, z);
    ids[i] = index_of(points[i]);
  }
  std::vector<PointId> out;
  out.reserve(m);
  for (std::size_t i : largest_indices(costs, ids, m)) out.push_back(points[i]);
  return out;
}

double diam(const DistanceOracle& metric, std::span<const PointId> points) {
  if (points.empty()) throw std::domain_error("diam of an empty set");
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, metric.distance(points[i], points[j]));
    }
  }
  return best;
}

double set_dist(const DistanceOracle& metric, std::span<const PointId> points,
                std::span<const PointId> centers) {
  if (points.empty()) throw std::domain_error("set_dist of an empty set");
  require_centers(centers);
  double best = std::numeric_limits<double>::infinity();
  for (PointId p : points) best = std::min(best, distance_to_set(metric, p, centers));
  return best;
}

TrimmedEvaluation evaluate_trimmed(const DistanceOracle& metric, std::span<const PointId> clients,
                                   std::span<const PointId> centers, double z, std::size_t m,
                                   std::span<const std::uint32_t> colors, std::span<const std::size_t> budgets) {
  TrimmedEvaluation out;
  if (colors.empty()) {
    out.cost = cost_m(metric, clients, centers, m, z);
    out.outliers = farthest_m(metric, clients, centers, m, z);
    return out;
  }
  if (colors.size() != clients.size()) throw std::invalid_argument("one color per client is required");
  std::vector<std::vector<PointId>> classes(budgets.size());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (colors[i] >= budgets.size()) throw std::invalid_argument("client color without a budget");
    classes[colors[i]].push_back(clients[i]);
  }
  for (std::size_t t = 0; t < classes.size(); ++t) {
    if (budgets[t] > classes[t].size()) throw std::domain_error("color budget exceeds the class size");
    out.cost += cost_m(metric, classes[t], centers, budgets[t], z);
    auto far = farthest_m(metric, classes[t], centers, budgets[t], z);
    out.outliers.insert(out.outliers.end(), far.begin(), far.end());
  }
  return out;
}

}  // namespace oclust
