#include "oclust/solvers.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "oclust/cost.hpp"
#include "oclust/rng.hpp"

namespace oclust {

namespace {

__extension__ typedef unsigned __int128 uint128;

std::uint64_t saturating_binomial(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // Exact while the running value stays below cap; C(n, i) grows monotonically in i <= n/2.
  uint128 value = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    value = value * (n - k + i) / i;
    if (value > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(value);
}

/// Depth-first enumeration in lexicographic order with a hook on every
/// accepted extension so callers can maintain incremental state.
template <class OnPush, class OnLeaf>
void enumerate_sets(std::span<const PointId> facilities, const CenterConstraint& constraint, std::uint64_t budget,
                    OnPush&& on_push, OnLeaf&& on_leaf) {
  const std::size_t target = constraint.target_size(facilities);
  if (constraint.is_cardinality() && saturating_binomial(facilities.size(), target, budget) > budget) {
    throw BudgetExceeded("center-set enumeration exceeds the budget of " + std::to_string(budget));
  }
  std::vector<std::size_t> chosen_index;
  std::vector<PointId> chosen;
  chosen_index.reserve(target);
  chosen.reserve(target);
  std::uint64_t visited = 0;
  const Matroid* matroid = constraint.matroid().get();

  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (chosen_index.size() == target) {
      if (++visited > budget) {
        throw BudgetExceeded("center-set enumeration exceeds the budget of " + std::to_string(budget));
      }
      on_leaf(std::span<const std::size_t>(chosen_index));
      return;
    }
    const std::size_t needed = target - chosen_index.size();
    for (std::size_t i = start; i + needed <= facilities.size(); ++i) {
      chosen.push_back(facilities[i]);
      if (matroid == nullptr || matroid->is_independent(chosen)) {
        chosen_index.push_back(i);
        on_push(chosen_index.size(), i);
        self(self, i + 1);
        chosen_index.pop_back();
      }
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
}

std::vector<PointId> centers_from_indices(std::span<const PointId> facilities, std::span<const std::size_t> idx) {
  std::vector<PointId> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(facilities[i]);
  return out;
}

double weighted_sum_of_mins(const CostTable& table, const WeightedPointSet& points,
                            std::span<const std::size_t> centers) {
  double sum = 0.0;
  for (std::size_t e = 0; e < points.size(); ++e) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) best = std::min(best, table(e, c));
    sum += best * static_cast<double>(points.entries[e].weight);
  }
  return sum;
}

std::vector<PointId> entry_points(const WeightedPointSet& points) {
  std::vector<PointId> out;
  out.reserve(points.size());
  for (const auto& e : points.entries) out.push_back(e.point);
  return out;
}

}  // namespace

std::string to_string(SolverKind kind) { return kind == SolverKind::exact ? "exact" : "local-search"; }

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "exact") return SolverKind::exact;
  if (name == "local-search" || name == "local_search") return SolverKind::local_search;
  throw std::invalid_argument("unknown solver kind: " + name);
}

std::optional<double> SolverHandle::beta_guarantee(double z) const {
  if (kind == SolverKind::exact) return 1.0;
  if (z == 1.0) return 5.0;
  return std::nullopt;
}

CenterConstraint CenterConstraint::cardinality(std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  CenterConstraint c;
  c.k_ = k;
  return c;
}

CenterConstraint CenterConstraint::independent_in(std::shared_ptr<const Matroid> matroid) {
  if (!matroid) throw std::invalid_argument("null matroid");
  CenterConstraint c;
  c.k_ = matroid->rank();
  c.matroid_ = std::move(matroid);
  return c;
}

bool CenterConstraint::admits(std::span<const PointId> centers) const {
  if (matroid_) return matroid_->is_independent(centers);
  return centers.size() <= k_;
}

std::size_t CenterConstraint::target_size(std::span<const PointId> facilities) const {
  if (matroid_) return matroid_->rank_of(facilities);
  return std::min(k_, facilities.size());
}

std::vector<PointId> expand_unweighted(const WeightedPointSet& points) {
  std::vector<PointId> out;
  out.reserve(points.total_weight());
  for (const auto& e : points.entries) out.insert(out.end(), e.weight, e.point);
  return out;
}

std::vector<PointId> sorted_unique(std::span<const PointId> points) {
  std::vector<PointId> out(points.begin(), points.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void for_each_center_set(std::span<const PointId> sorted_facilities, const CenterConstraint& constraint,
                         std::uint64_t budget, const std::function<void(std::span<const std::size_t>)>& visit) {
  enumerate_sets(sorted_facilities, constraint, budget, [](std::size_t, std::size_t) {}, visit);
}

std::uint64_t count_center_sets(std::span<const PointId> sorted_facilities, const CenterConstraint& constraint,
                                std::uint64_t budget) {
  if (constraint.is_cardinality()) {
    return saturating_binomial(sorted_facilities.size(), constraint.target_size(sorted_facilities), budget);
  }
  std::uint64_t count = 0;
  try {
    enumerate_sets(sorted_facilities, constraint, budget, [](std::size_t, std::size_t) {},
                   [&](std::span<const std::size_t>) { ++count; });
  } catch (const BudgetExceeded&) {
    return budget + 1;
  }
  return count;
}

CenterResult exact_constrained(const DistanceOracle& metric, const WeightedPointSet& points,
                               std::span<const PointId> facilities, const CenterConstraint& constraint, double z,
                               std::uint64_t budget) {
  points.validate();
  const auto sorted = sorted_unique(facilities);
  if (sorted.empty()) throw std::domain_error("no facilities to choose from");
  const auto pts = entry_points(points);
  const CostTable table(metric, pts, sorted, z);
  const std::size_t n = points.size();
  const std::size_t target = constraint.target_size(sorted);
  if (target == 0) throw std::domain_error("no admissible nonempty center set");

  // mins[d * n + e]: cost of entry e to the first d chosen centers.
  std::vector<double> mins((target + 1) * n, std::numeric_limits<double>::infinity());
  CenterResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_idx;

  auto on_push = [&](std::size_t depth, std::size_t column) {
    const double* prev = mins.data() + (depth - 1) * n;
    double* cur = mins.data() + depth * n;
    for (std::size_t e = 0; e < n; ++e) cur[e] = std::min(prev[e], table(e, column));
  };
  auto on_leaf = [&](std::span<const std::size_t> idx) {
    const double* cur = mins.data() + target * n;
    double sum = 0.0;
    for (std::size_t e = 0; e < n; ++e) sum += cur[e] * static_cast<double>(points.entries[e].weight);
    if (sum < best.cost || best_idx.empty()) {
      best.cost = sum;
      best_idx.assign(idx.begin(), idx.end());
    }
  };
  enumerate_sets(sorted, constraint, budget, on_push, on_leaf);
  if (best_idx.empty()) throw std::domain_error("no admissible center set");
  best.centers = centers_from_indices(sorted, best_idx);
  if (n == 0) best.cost = 0.0;
  return best;
}

CenterResult exact_kmedian(const DistanceOracle& metric, const WeightedPointSet& points,
                           std::span<const PointId> facilities, std::size_t k, double z, std::uint64_t budget) {
  return exact_constrained(metric, points, facilities, CenterConstraint::cardinality(k), z, budget);
}

namespace {

struct LocalSearchRun {
  std::vector<std::size_t> centers;  // sorted column indices
  bool converged = true;
  std::size_t iterations = 0;
};

bool admits_indices(const CenterConstraint& constraint, std::span<const PointId> facilities,
                    std::span<const std::size_t> idx) {
  if (constraint.is_cardinality()) return idx.size() <= constraint.k();
  return constraint.admits(centers_from_indices(facilities, idx));
}

std::vector<std::size_t> greedy_initial(std::span<const PointId> facilities, const CenterConstraint& constraint,
                                        std::span<const std::size_t> order, std::size_t target) {
  std::vector<std::size_t> chosen;
  for (std::size_t i : order) {
    if (chosen.size() == target) break;
    chosen.push_back(i);
    if (!admits_indices(constraint, facilities, chosen)) chosen.pop_back();
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

LocalSearchRun run_swaps(const CostTable& table, const WeightedPointSet& points, std::span<const PointId> facilities,
                         const CenterConstraint& constraint, const SolverHandle& handle,
                         std::vector<std::size_t> current) {
  const std::size_t n = points.size();
  const std::size_t f_count = facilities.size();
  LocalSearchRun run;
  double current_cost = weighted_sum_of_mins(table, points, current);
  std::vector<double> nearest(n), second(n);
  std::vector<std::size_t> nearest_pos(n);
  std::vector<char> in_set(f_count, 0);

  for (;;) {
    if (current_cost == 0.0) break;
    if (run.iterations >= handle.iteration_cap) {
      run.converged = false;
      break;
    }
    std::fill(in_set.begin(), in_set.end(), 0);
    for (std::size_t c : current) in_set[c] = 1;
    for (std::size_t e = 0; e < n; ++e) {
      nearest[e] = second[e] = std::numeric_limits<double>::infinity();
      for (std::size_t pos = 0; pos < current.size(); ++pos) {
        const double v = table(e, current[pos]);
        if (v < nearest[e]) {
          second[e] = nearest[e];
          nearest[e] = v;
          nearest_pos[e] = pos;
        } else if (v < second[e]) {
          second[e] = v;
        }
      }
    }
    const double bar = (1.0 - handle.improvement_threshold) * current_cost;
    bool swapped = false;
    for (std::size_t pos = 0; pos < current.size() && !swapped; ++pos) {
      for (std::size_t f = 0; f < f_count && !swapped; ++f) {
        if (in_set[f]) continue;
        if (!constraint.is_cardinality()) {
          auto candidate = current;
          candidate[pos] = f;
          if (!admits_indices(constraint, facilities, candidate)) continue;
        }
        double cost = 0.0;
        for (std::size_t e = 0; e < n; ++e) {
          const double base = nearest_pos[e] == pos ? second[e] : nearest[e];
          cost += std::min(base, table(e, f)) * static_cast<double>(points.entries[e].weight);
        }
        if (cost < bar) {
          current[pos] = f;
          std::sort(current.begin(), current.end());
          current_cost = weighted_sum_of_mins(table, points, current);
          swapped = true;
        }
      }
    }
    if (!swapped) break;
    ++run.iterations;
  }
  run.centers = std::move(current);
  return run;
}

}  // namespace

CenterResult local_search_constrained(const DistanceOracle& metric, const WeightedPointSet& points,
                                      std::span<const PointId> facilities, const CenterConstraint& constraint,
                                      double z, const SolverHandle& handle, std::span<const PointId> initial) {
  points.validate();
  const auto sorted = sorted_unique(facilities);
  if (sorted.empty()) throw std::domain_error("no facilities to choose from");
  const std::size_t target = constraint.target_size(sorted);
  if (target == 0) throw std::domain_error("no admissible nonempty center set");
  const auto pts = entry_points(points);
  const CostTable table(metric, pts, sorted, z);

  std::vector<std::size_t> start;
  if (!initial.empty()) {
    for (PointId c : sorted_unique(initial)) {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
      if (it == sorted.end() || *it != c) throw std::invalid_argument("initial center is not a facility");
      start.push_back(static_cast<std::size_t>(it - sorted.begin()));
    }
    if (!admits_indices(constraint, sorted, start)) throw std::invalid_argument("initial centers not admissible");
  } else {
    std::vector<std::size_t> order(sorted.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    start = greedy_initial(sorted, constraint, order, target);
  }

  LocalSearchRun best = run_swaps(table, points, sorted, constraint, handle, start);
  double best_cost = weighted_sum_of_mins(table, points, best.centers);
  for (std::size_t r = 0; r < handle.restarts; ++r) {
    Rng rng(derive_seed(handle.seed, {kRestartStream, r}));
    std::vector<std::size_t> order(sorted.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    auto run = run_swaps(table, points, sorted, constraint, handle, greedy_initial(sorted, constraint, order, target));
    const double cost = weighted_sum_of_mins(table, points, run.centers);
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(run);
    }
  }

  CenterResult out;
  out.centers = centers_from_indices(sorted, best.centers);
  out.cost = best_cost;
  out.converged = best.converged;
  out.iterations = best.iterations;
  return out;
}

CenterResult local_search_kmedian(const DistanceOracle& metric, const WeightedPointSet& points,
                                  std::span<const PointId> facilities, std::size_t k, double z,
                                  const SolverHandle& handle, std::span<const PointId> initial) {
  return local_search_constrained(metric, points, facilities, CenterConstraint::cardinality(k), z, handle, initial);
}

CenterResult solve_outlier_free(const DistanceOracle& metric, const WeightedPointSet& points,
                                std::span<const PointId> facilities, const CenterConstraint& constraint, double z,
                                const SolverHandle& handle) {
  if (handle.kind == SolverKind::exact) {
    return exact_constrained(metric, points, facilities, constraint, z, handle.enumeration_budget);
  }
  return local_search_constrained(metric, points, facilities, constraint, z, handle);
}

Solution exact_constrained_outlier_oracle(const MetricInstance& inst, const CenterConstraint& constraint,
                                          std::span<const std::uint32_t> client_colors,
                                          std::span<const std::size_t> color_budgets, std::uint64_t budget) {
  inst.validate();
  const auto sorted = sorted_unique(inst.facilities);
  const CostTable table(inst.oracle(), inst.clients, sorted, inst.z);
  const std::size_t n = inst.clients.size();

  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = index_of(inst.clients[i]);

  // Per-class positions so the trimmed sum matches evaluate_trimmed exactly.
  std::vector<std::vector<std::size_t>> classes;
  if (!client_colors.empty()) {
    if (client_colors.size() != n) throw std::invalid_argument("one color per client is required");
    classes.resize(color_budgets.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (client_colors[i] >= color_budgets.size()) throw std::invalid_argument("client color without a budget");
      classes[client_colors[i]].push_back(i);
    }
    for (std::size_t t = 0; t < classes.size(); ++t) {
      if (color_budgets[t] > classes[t].size()) throw std::domain_error("color budget exceeds the class size");
    }
  }

  std::vector<double> costs(n);
  std::vector<double> class_costs;
  std::vector<std::uint64_t> class_ids;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_idx;
  for_each_center_set(sorted, constraint, budget, [&](std::span<const std::size_t> idx) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::numeric_limits<double>::infinity();
      for (std::size_t c : idx) v = std::min(v, table(i, c));
      costs[i] = v;
    }
    double total = 0.0;
    if (classes.empty()) {
      total = trimmed_sum(costs, ids, inst.m);
    } else {
      for (std::size_t t = 0; t < classes.size(); ++t) {
        class_costs.clear();
        class_ids.clear();
        for (std::size_t i : classes[t]) {
          class_costs.push_back(costs[i]);
          class_ids.push_back(ids[i]);
        }
        total += trimmed_sum(class_costs, class_ids, color_budgets[t]);
      }
    }
    if (total < best_cost || best_idx.empty()) {
      best_cost = total;
      best_idx.assign(idx.begin(), idx.end());
    }
  });
  if (best_idx.empty()) throw std::domain_error("no admissible center set");

  Solution out;
  out.centers = centers_from_indices(sorted, best_idx);
  auto eval = evaluate_trimmed(inst.oracle(), inst.clients, out.centers, inst.z, inst.m, client_colors, color_budgets);
  out.cost = eval.cost;
  out.outliers = std::move(eval.outliers);
  out.candidate_tag = "oracle";
  return out;
}

Solution exact_outlier_oracle(const MetricInstance& inst, std::uint64_t budget) {
  return exact_constrained_outlier_oracle(inst, CenterConstraint::cardinality(inst.k), {}, {}, budget);
}

}  // namespace oclust
