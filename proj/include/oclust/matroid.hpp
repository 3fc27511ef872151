#pragma once

// Matroids given by independence oracles.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "oclust/metric.hpp"

namespace oclust {

class Matroid {
 public:
  virtual ~Matroid() = default;

  virtual const std::vector<PointId>& ground_set() const = 0;
  /// Sets are given as distinct ground-set elements in any order.
  virtual bool is_independent(std::span<const PointId> set) const = 0;

  /// Size of a greedy maximal independent set (all bases share it).
  virtual std::size_t rank() const;
  /// Rank of the restriction to `subset`.
  std::size_t rank_of(std::span<const PointId> subset) const;
};

class UniformMatroid final : public Matroid {
 public:
  UniformMatroid(std::vector<PointId> ground, std::size_t rank);
  const std::vector<PointId>& ground_set() const override { return ground_; }
  bool is_independent(std::span<const PointId> set) const override;
  std::size_t rank() const override;
  std::size_t capacity() const { return rank_; }

 private:
  std::vector<PointId> ground_;
  std::size_t rank_;
};

/// Ground set split into parts; a set is independent when it takes at most
/// capacity[p] elements from every part p.
class PartitionMatroid final : public Matroid {
 public:
  struct Part {
    std::size_t capacity = 1;
    std::vector<PointId> members;
  };
  explicit PartitionMatroid(std::vector<Part> parts);
  const std::vector<PointId>& ground_set() const override { return ground_; }
  bool is_independent(std::span<const PointId> set) const override;
  const std::vector<Part>& parts() const { return parts_; }

 private:
  std::vector<Part> parts_;
  std::vector<PointId> ground_;
  std::unordered_map<std::uint32_t, std::size_t> part_of_;
};

/// Independent family listed explicitly; a set is independent when it is
/// contained in some listed set (the listed sets need not be closed under
/// subsets).
class ExplicitMatroid final : public Matroid {
 public:
  ExplicitMatroid(std::vector<PointId> ground, std::vector<std::vector<PointId>> independent_sets);
  const std::vector<PointId>& ground_set() const override { return ground_; }
  bool is_independent(std::span<const PointId> set) const override;
  const std::vector<std::vector<PointId>>& listed_sets() const { return sets_; }

 private:
  std::vector<PointId> ground_;
  std::vector<std::vector<PointId>> sets_;  // each sorted
};

/// M over F plus the uniform matroid of rank m over X.
class DirectSumMatroid final : public Matroid {
 public:
  DirectSumMatroid(std::shared_ptr<const Matroid> base, std::vector<PointId> extra, std::size_t extra_rank);
  const std::vector<PointId>& ground_set() const override { return ground_; }
  bool is_independent(std::span<const PointId> set) const override;
  std::size_t rank() const override;

 private:
  std::shared_ptr<const Matroid> base_;
  std::vector<PointId> ground_;
  std::vector<char> in_extra_;  // indexed by point id
  std::size_t extra_rank_;
};

/// Caches oracle answers behind a mutex; safe for concurrent queries.
class MemoizedMatroid final : public Matroid {
 public:
  explicit MemoizedMatroid(std::shared_ptr<const Matroid> inner);
  const std::vector<PointId>& ground_set() const override { return inner_->ground_set(); }
  bool is_independent(std::span<const PointId> set) const override;
  std::size_t rank() const override { return inner_->rank(); }
  std::size_t cache_size() const;

 private:
  std::shared_ptr<const Matroid> inner_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<std::uint32_t>, bool> cache_;
};

/// Direct sum of `base` (over F) with the rank-m uniform matroid over `clients`.
/// Throws std::domain_error when F and the clients share ids.
std::shared_ptr<const Matroid> direct_sum_matroid(std::shared_ptr<const Matroid> base,
                                                  std::span<const PointId> clients, std::size_t m);

struct AxiomReport {
  bool empty_independent = false;
  bool hereditary = false;
  bool exchange = false;
  std::uint64_t independent_sets = 0;
  std::uint64_t pairs_checked = 0;
  std::string counterexample;

  bool ok() const { return empty_independent && hereditary && exchange; }
};

/// Exhaustive check of the three matroid axioms over all subsets of the
/// ground set. Refuses ground sets larger than `max_ground`.
AxiomReport check_matroid_axioms(const Matroid& matroid, std::size_t max_ground = 12);

}  // namespace oclust
