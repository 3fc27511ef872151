#include "oclust/matroid.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace oclust {

namespace {

std::vector<std::uint32_t> sorted_key(std::span<const PointId> set) {
  std::vector<std::uint32_t> key;
  key.reserve(set.size());
  for (PointId p : set) key.push_back(index_of(p));
  std::sort(key.begin(), key.end());
  return key;
}

std::string format_set(std::span<const PointId> set) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < set.size(); ++i) os << (i ? "," : "") << index_of(set[i]);
  os << '}';
  return os.str();
}

}  // namespace

std::size_t Matroid::rank() const { return rank_of(ground_set()); }

std::size_t Matroid::rank_of(std::span<const PointId> subset) const {
  std::vector<PointId> current;
  for (PointId p : subset) {
    current.push_back(p);
    if (!is_independent(current)) current.pop_back();
  }
  return current.size();
}

UniformMatroid::UniformMatroid(std::vector<PointId> ground, std::size_t rank)
    : ground_(std::move(ground)), rank_(rank) {}

bool UniformMatroid::is_independent(std::span<const PointId> set) const { return set.size() <= rank_; }

std::size_t UniformMatroid::rank() const { return std::min(rank_, ground_.size()); }

PartitionMatroid::PartitionMatroid(std::vector<Part> parts) : parts_(std::move(parts)) {
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    for (PointId x : parts_[p].members) {
      if (!part_of_.emplace(index_of(x), p).second) {
        throw std::invalid_argument("partition matroid parts overlap");
      }
      ground_.push_back(x);
    }
  }
  std::sort(ground_.begin(), ground_.end());
}

bool PartitionMatroid::is_independent(std::span<const PointId> set) const {
  std::vector<std::size_t> used(parts_.size(), 0);
  for (PointId x : set) {
    auto it = part_of_.find(index_of(x));
    if (it == part_of_.end()) return false;
    if (++used[it->second] > parts_[it->second].capacity) return false;
  }
  return true;
}

ExplicitMatroid::ExplicitMatroid(std::vector<PointId> ground, std::vector<std::vector<PointId>> independent_sets)
    : ground_(std::move(ground)), sets_(std::move(independent_sets)) {
  for (auto& s : sets_) {
    std::sort(s.begin(), s.end());
    for (PointId p : s) {
      if (std::find(ground_.begin(), ground_.end(), p) == ground_.end()) {
        throw std::invalid_argument("explicit matroid set uses a point outside the ground set");
      }
    }
  }
}

bool ExplicitMatroid::is_independent(std::span<const PointId> set) const {
  if (set.empty()) return true;
  std::vector<PointId> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& s : sets_) {
    if (std::includes(s.begin(), s.end(), sorted.begin(), sorted.end())) return true;
  }
  return false;
}

DirectSumMatroid::DirectSumMatroid(std::shared_ptr<const Matroid> base, std::vector<PointId> extra,
                                   std::size_t extra_rank)
    : base_(std::move(base)), extra_rank_(extra_rank) {
  std::uint32_t max_id = 0;
  for (PointId p : base_->ground_set()) max_id = std::max(max_id, index_of(p));
  for (PointId p : extra) max_id = std::max(max_id, index_of(p));
  in_extra_.assign(static_cast<std::size_t>(max_id) + 1, 0);
  for (PointId p : extra) in_extra_[index_of(p)] = 1;
  for (PointId p : base_->ground_set()) {
    if (in_extra_[index_of(p)]) throw std::domain_error("direct sum requires disjoint ground sets");
  }
  ground_ = base_->ground_set();
  ground_.insert(ground_.end(), extra.begin(), extra.end());
  std::sort(ground_.begin(), ground_.end());
  if (std::adjacent_find(ground_.begin(), ground_.end()) != ground_.end()) {
    throw std::domain_error("direct sum ground set has repeated points");
  }
}

bool DirectSumMatroid::is_independent(std::span<const PointId> set) const {
  std::vector<PointId> base_part;
  std::size_t extra_count = 0;
  for (PointId p : set) {
    if (index_of(p) < in_extra_.size() && in_extra_[index_of(p)]) {
      ++extra_count;
    } else {
      base_part.push_back(p);
    }
  }
  return extra_count <= extra_rank_ && base_->is_independent(base_part);
}

std::size_t DirectSumMatroid::rank() const {
  std::size_t extra_size = 0;
  for (char c : in_extra_) extra_size += c ? 1 : 0;
  return base_->rank() + std::min(extra_rank_, extra_size);
}

MemoizedMatroid::MemoizedMatroid(std::shared_ptr<const Matroid> inner) : inner_(std::move(inner)) {}

bool MemoizedMatroid::is_independent(std::span<const PointId> set) const {
  auto key = sorted_key(set);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const bool answer = inner_->is_independent(set);
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(key), answer);
  return answer;
}

std::size_t MemoizedMatroid::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::shared_ptr<const Matroid> direct_sum_matroid(std::shared_ptr<const Matroid> base,
                                                  std::span<const PointId> clients, std::size_t m) {
  return std::make_shared<DirectSumMatroid>(std::move(base), std::vector<PointId>(clients.begin(), clients.end()), m);
}

AxiomReport check_matroid_axioms(const Matroid& matroid, std::size_t max_ground) {
  const auto& ground = matroid.ground_set();
  if (ground.size() > max_ground || ground.size() >= 32) {
    throw std::domain_error("ground set too large for exhaustive axiom check");
  }
  const std::uint32_t universe = 1u << ground.size();
  auto members = [&](std::uint32_t mask) {
    std::vector<PointId> out;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      if (mask & (1u << i)) out.push_back(ground[i]);
    }
    return out;
  };
  std::vector<char> independent(universe, 0);
  for (std::uint32_t mask = 0; mask < universe; ++mask) independent[mask] = matroid.is_independent(members(mask));

  AxiomReport report;
  report.empty_independent = independent[0] != 0;
  if (!report.empty_independent) report.counterexample = "empty set is dependent";

  // Hereditary: checking every one-element deletion suffices by induction.
  report.hereditary = true;
  for (std::uint32_t mask = 0; mask < universe && report.hereditary; ++mask) {
    if (!independent[mask]) continue;
    ++report.independent_sets;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      const std::uint32_t bit = 1u << i;
      if ((mask & bit) && !independent[mask ^ bit]) {
        report.hereditary = false;
        report.counterexample = "subset of independent " + format_set(members(mask)) + " is dependent";
        break;
      }
    }
  }

  report.exchange = true;
  for (std::uint32_t a = 0; a < universe && report.exchange; ++a) {
    if (!independent[a]) continue;
    const int size_a = std::popcount(a);
    for (std::uint32_t b = 0; b < universe; ++b) {
      if (!independent[b] || std::popcount(b) >= size_a) continue;
      ++report.pairs_checked;
      const std::uint32_t candidates = a & ~b;
      bool found = false;
      for (std::size_t i = 0; i < ground.size() && !found; ++i) {
        const std::uint32_t bit = 1u << i;
        if ((candidates & bit) && independent[b | bit]) found = true;
      }
      if (!found) {
        report.exchange = false;
        report.counterexample = "no exchange element from " + format_set(members(a)) + " into " +
                                format_set(members(b));
        break;
      }
    }
  }
  return report;
}

}  // namespace oclust
