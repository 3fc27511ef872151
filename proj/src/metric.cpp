#include "oclust/metric.hpp"

#include <cmath>
#include <sstream>

#include "oclust/cost.hpp"

namespace oclust {

std::vector<PointId> point_range(std::uint32_t first, std::uint32_t count) {
  std::vector<PointId> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(point_id(first + i));
  return out;
}

MatrixDistance MatrixDistance::from_lower_triangle(std::size_t n, std::span<const double> lower) {
  if (lower.size() != n * (n == 0 ? 0 : n - 1) / 2) {
    throw std::invalid_argument("lower triangle has wrong number of entries");
  }
  std::vector<double> full(n * n, 0.0);
  std::size_t pos = 0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      full[i * n + j] = lower[pos];
      full[j * n + i] = lower[pos];
      ++pos;
    }
  }
  return MatrixDistance(n, std::move(full));
}

MatrixDistance::MatrixDistance(std::size_t n, std::vector<double> full) : n_(n), values_(std::move(full)) {
  if (values_.size() != n_ * n_) throw std::invalid_argument("distance matrix must be n*n");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (values_[i * n_ + j] != values_[j * n_ + i]) {
        throw std::invalid_argument("distance matrix is not symmetric");
      }
    }
  }
  if (auto violation = find_metric_violation(*this)) throw std::invalid_argument(*violation);
}

EuclideanDistance::EuclideanDistance(std::size_t dimension, std::vector<double> coordinates)
    : dimension_(dimension), coordinates_(std::move(coordinates)) {
  if (dimension_ == 0) throw std::invalid_argument("dimension must be positive");
  if (coordinates_.size() % dimension_ != 0) {
    throw std::invalid_argument("coordinate count is not a multiple of the dimension");
  }
  for (double c : coordinates_) {
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite coordinate");
  }
}

double EuclideanDistance::distance(PointId a, PointId b) const {
  const double* pa = coordinates_.data() + static_cast<std::size_t>(index_of(a)) * dimension_;
  const double* pb = coordinates_.data() + static_cast<std::size_t>(index_of(b)) * dimension_;
  double sum = 0.0;
  for (std::size_t i = 0; i < dimension_; ++i) {
    const double diff = pa[i] - pb[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

std::optional<std::string> find_metric_violation(const DistanceOracle& metric, double relative_tolerance) {
  const std::size_t n = metric.size();
  for (std::uint32_t i = 0; i < n; ++i) {
    if (metric.distance(point_id(i), point_id(i)) != 0.0) {
      return "d(" + std::to_string(i) + "," + std::to_string(i) + ") is not zero";
    }
    for (std::uint32_t j = 0; j < n; ++j) {
      const double d = metric.distance(point_id(i), point_id(j));
      if (!(d >= 0.0) || !std::isfinite(d)) {
        return "d(" + std::to_string(i) + "," + std::to_string(j) + ") is negative or not finite";
      }
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      const double dij = metric.distance(point_id(i), point_id(j));
      for (std::uint32_t r = 0; r < n; ++r) {
        const double via = metric.distance(point_id(i), point_id(r)) + metric.distance(point_id(r), point_id(j));
        if (dij > via * (1.0 + relative_tolerance) + 1e-300) {
          std::ostringstream os;
          os << "triangle inequality violated: d(" << i << "," << j << ") > d(" << i << "," << r
             << ") + d(" << r << "," << j << ")";
          return os.str();
        }
      }
    }
  }
  return std::nullopt;
}

std::uint64_t WeightedPointSet::total_weight() const {
  std::uint64_t total = 0;
  for (const auto& e : entries) total += e.weight;
  return total;
}

void WeightedPointSet::validate() const {
  for (const auto& e : entries) {
    if (e.weight == 0) throw std::invalid_argument("weighted point with zero weight");
  }
}

WeightedPointSet WeightedPointSet::unit(std::span<const PointId> points) {
  WeightedPointSet out;
  out.entries.reserve(points.size());
  for (PointId p : points) out.entries.push_back({p, 1});
  return out;
}

void MetricInstance::validate() const {
  if (!metric) throw std::invalid_argument("instance has no distance oracle");
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (!(z >= 1.0) || !std::isfinite(z)) throw std::invalid_argument("z must be a finite real >= 1");
  if (m > clients.size()) throw std::invalid_argument("m exceeds the number of clients");
  if (facilities.empty()) throw std::invalid_argument("instance has no facilities");
  const std::size_t n = metric->size();
  for (PointId p : clients) {
    if (index_of(p) >= n) throw std::invalid_argument("client id outside the metric universe");
  }
  for (PointId p : facilities) {
    if (index_of(p) >= n) throw std::invalid_argument("facility id outside the metric universe");
  }
}

CostTable::CostTable(const DistanceOracle& metric, std::span<const PointId> rows,
                     std::span<const PointId> columns, double z)
    : rows_(rows.size()), columns_(columns.size()), values_(rows.size() * columns.size()) {
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < columns_; ++c) {
      values_[r * columns_ + c] = power(metric.distance(rows[r], columns[c]), z);
    }
  }
}

}  // namespace oclust
