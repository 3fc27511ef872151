#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oclust {

/// Identifier of a point inside a distance oracle's universe (0 .. size()-1).
enum class PointId : std::uint32_t {};

constexpr std::uint32_t index_of(PointId p) { return static_cast<std::uint32_t>(p); }
constexpr PointId point_id(std::uint32_t i) { return PointId{i}; }

std::vector<PointId> point_range(std::uint32_t first, std::uint32_t count);

/// Read-only distance oracle. Implementations must be safe for concurrent reads.
class DistanceOracle {
 public:
  virtual ~DistanceOracle() = default;
  virtual std::size_t size() const = 0;
  virtual double distance(PointId a, PointId b) const = 0;
};

/// Explicit symmetric matrix. Construction checks zero diagonal, non-negativity
/// and the triangle inequality over every triple.
class MatrixDistance final : public DistanceOracle {
 public:
  /// `lower` holds rows 1..n-1 of the strict lower triangle, row-major:
  /// d(1,0), d(2,0), d(2,1), d(3,0), ...
  static MatrixDistance from_lower_triangle(std::size_t n, std::span<const double> lower);
  /// `full` is n*n row-major and must be symmetric.
  MatrixDistance(std::size_t n, std::vector<double> full);

  std::size_t size() const override { return n_; }
  double distance(PointId a, PointId b) const override {
    return values_[static_cast<std::size_t>(index_of(a)) * n_ + index_of(b)];
  }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// Points in R^d; distances computed on demand.
class EuclideanDistance final : public DistanceOracle {
 public:
  EuclideanDistance(std::size_t dimension, std::vector<double> coordinates);

  std::size_t size() const override { return coordinates_.size() / dimension_; }
  std::size_t dimension() const { return dimension_; }
  std::span<const double> coordinates(PointId p) const {
    return {coordinates_.data() + static_cast<std::size_t>(index_of(p)) * dimension_, dimension_};
  }
  double distance(PointId a, PointId b) const override;

 private:
  std::size_t dimension_;
  std::vector<double> coordinates_;
};

/// Description of the first metric-axiom violation found, if any.
std::optional<std::string> find_metric_violation(const DistanceOracle& metric,
                                                 double relative_tolerance = 1e-9);

struct WeightedPoint {
  PointId point;
  std::uint64_t weight = 1;

  friend bool operator==(const WeightedPoint&, const WeightedPoint&) = default;
};

/// Multiset of points with positive integer weights. The same point may
/// appear in several entries (repeated sample draws).
struct WeightedPointSet {
  std::vector<WeightedPoint> entries;

  std::size_t size() const { return entries.size(); }
  std::uint64_t total_weight() const;
  void validate() const;

  static WeightedPointSet unit(std::span<const PointId> points);
};

/// Clients X, facilities F, distance oracle, k, m and the cost exponent z.
struct MetricInstance {
  std::shared_ptr<const DistanceOracle> metric;
  std::vector<PointId> clients;
  std::vector<PointId> facilities;
  std::size_t k = 1;
  std::size_t m = 0;
  double z = 1.0;

  /// Throws std::invalid_argument on malformed instances.
  void validate() const;
  const DistanceOracle& oracle() const { return *metric; }
};

/// Centers, outliers and the outlier-trimmed cost they realize.
struct Solution {
  std::vector<PointId> centers;
  std::vector<PointId> outliers;
  double cost = 0.0;
  std::string candidate_tag;
};

/// Precomputed table of d(row, column)^z for a list of row points and column
/// facilities; the workhorse of the exact solvers.
class CostTable {
 public:
  CostTable(const DistanceOracle& metric, std::span<const PointId> rows,
            std::span<const PointId> columns, double z);

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return columns_; }
  double operator()(std::size_t row, std::size_t column) const {
    return values_[row * columns_ + column];
  }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * columns_, columns_}; }

 private:
  std::size_t rows_;
  std::size_t columns_;
  std::vector<double> values_;
};

}  // namespace oclust
