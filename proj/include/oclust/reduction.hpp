#pragma once

// Outlier reduction driver: per round, build the ring coreset S of the
// clients, enumerate every T in S with |T| <= m, solve the outlier-free
// problem on S \ T, and keep the candidate center set with the smallest
// outlier-trimmed cost on the original clients.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oclust/coreset.hpp"
#include "oclust/matroid.hpp"
#include "oclust/metric.hpp"
#include "oclust/solvers.hpp"

namespace oclust {

/// One problem shape covers every variant: colors (per-color budgets) and a
/// matroid over the facilities are optional.
struct OutlierProblem {
  MetricInstance instance;
  /// Color index per client (aligned with instance.clients); empty means a
  /// single class with budget instance.m.
  std::vector<std::uint32_t> client_colors;
  /// Budget per color index; must sum to instance.m.
  std::vector<std::size_t> color_budgets;
  /// When set, centers must be independent; instance.k is ignored in favor of
  /// the matroid rank.
  std::shared_ptr<const Matroid> matroid;

  void validate() const;
  bool colorful() const { return !client_colors.empty(); }
  std::size_t color_count() const { return colorful() ? color_budgets.size() : 1; }
  CenterConstraint constraint() const;
};

/// ceil(log2(1 / 0.05)).
std::size_t default_rounds();

struct ReductionOptions {
  CoresetParams coreset;
  SolverHandle solver;
  BaselineOptions baseline;
  std::size_t rounds = default_rounds();
  std::uint64_t seed = 0;
  /// Reuse the trimmed cost of a center set already evaluated in the same
  /// round. The result is identical; only the work changes.
  bool memoize_candidates = false;
  std::size_t threads = 1;
  /// Refuse up front when a round would enumerate more subsets T.
  std::uint64_t max_subsets = 100'000'000;
  /// Cell limit of the per-round table used by the exact black box
  /// (admissible center sets x coreset entries).
  std::uint64_t table_budget = std::uint64_t{1} << 24;
};

struct RoundSummary {
  std::size_t round = 0;
  std::uint64_t seed = 0;
  std::size_t coreset_size = 0;
  std::uint64_t coreset_size_bound = 0;
  std::uint64_t sample_size = 0;
  std::size_t rings = 0;
  std::size_t max_ring_size = 0;
  bool lossless = false;
  std::uint64_t subsets = 0;
  std::uint64_t candidates_evaluated = 0;
  std::uint64_t candidates_refused = 0;
  double best_cost = 0.0;
  std::string best_tag;
};

struct ReductionReport {
  std::uint64_t candidates_evaluated = 0;
  std::uint64_t candidates_refused = 0;
  Solution best;
  std::vector<RoundSummary> per_round;
  std::size_t rounds = 0;

  // Shared by every round.
  std::vector<PointId> baseline;
  double baseline_cost = 0.0;
  bool baseline_exact = true;
  bool baseline_converged = true;
  double tau = 1.0;
  double radius = 0.0;
  std::size_t phi = 0;
  /// (1 + eps) / (1 - eps); the guarantee is this times the black-box factor.
  double approximation_factor = 1.0;
  std::optional<double> beta;
};

/// Number of subsets T with |T| <= m (and |T n color t| <= budgets[t] when
/// colors are given), saturating at cap + 1.
std::uint64_t count_outlier_subsets(std::size_t entry_count, std::size_t m,
                                    std::span<const std::uint32_t> entry_colors,
                                    std::span<const std::size_t> budgets, std::uint64_t cap);

/// Visits subsets of entry indices 0..entry_count-1 by size, then
/// lexicographically. With colors, a subset is generated only when it keeps
/// every color within its budget. Returns the number visited.
std::uint64_t for_each_outlier_subset(std::size_t entry_count, std::size_t m,
                                      std::span<const std::uint32_t> entry_colors,
                                      std::span<const std::size_t> budgets,
                                      const std::function<void(std::span<const std::size_t>)>& visit);

std::vector<std::vector<std::size_t>> enumerate_outlier_subsets(const WeightedCoreset& coreset, std::size_t m);

/// cost_m (or the per-color sum) of C on the problem's clients, with the
/// canonical outliers.
Solution evaluate_candidate(std::span<const PointId> centers, const OutlierProblem& problem);
Solution evaluate_candidate(std::span<const PointId> centers, const MetricInstance& inst);

/// Baseline, rings and per-ring sample size; shared by every round.
struct PreparedRings {
  Baseline baseline;
  RingPartition rings;
  std::uint64_t sample_size = 0;
  std::size_t k = 0;  // size of the admissible center sets
};

PreparedRings prepare_rings(const OutlierProblem& problem, const ReductionOptions& options);

/// Seed of round r: derive_seed(seed, kRoundStream, r).
std::uint64_t round_seed(std::uint64_t seed, std::size_t round);

/// General driver for every variant.
ReductionReport solve_problem(const OutlierProblem& problem, const ReductionOptions& options);

ReductionReport solve_with_outliers(const MetricInstance& inst, const ReductionOptions& options);

}  // namespace oclust
