#include <gtest/gtest.h>

#include <algorithm>

#include "oclust/cost.hpp"
#include "oclust/reduction.hpp"
#include "test_support.hpp"

namespace oclust {
namespace {

using testing::Gen;

ReductionOptions lossless_options(const MetricInstance& inst, std::uint64_t seed = 1) {
  ReductionOptions o;
  o.coreset.practical_s = std::max<std::size_t>(1, inst.clients.size());
  o.seed = seed;
  o.rounds = 1;
  return o;
}

ReductionOptions sampled_options(std::uint64_t s, std::uint64_t seed) {
  ReductionOptions o;
  o.coreset.practical_s = s;
  o.seed = seed;
  o.rounds = 2;
  o.table_budget = 1u << 20;
  return o;
}

std::uint64_t binomial_prefix(std::uint64_t n, std::size_t m) {
  std::uint64_t total = 0;
  std::uint64_t term = 1;
  for (std::size_t t = 0; t <= m && t <= n; ++t) {
    total += term;
    term = term * (n - t) / (t + 1);
  }
  return total;
}

TEST(OutlierSubsets, CountsAndOrder) {
  std::vector<std::vector<std::size_t>> seen;
  const auto visited = for_each_outlier_subset(4, 2, {}, {}, [&](std::span<const std::size_t> t) {
    seen.emplace_back(t.begin(), t.end());
  });
  EXPECT_EQ(visited, 11u);
  const std::vector<std::vector<std::size_t>> expected{{},     {0},    {1},    {2},    {3},   {0, 1},
                                                       {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(seen, expected);
  EXPECT_EQ(for_each_outlier_subset(4, 0, {}, {}, [](std::span<const std::size_t>) {}), 1u);
  EXPECT_EQ(count_outlier_subsets(4, 2, {}, {}, 1000), 11u);
}

TEST(OutlierSubsets, EnumerationFromACoreset) {
  RingPartition rp;
  for (std::uint32_t i = 0; i < 4; ++i) rp.rings[{0, 0, 0}].push_back(point_id(i));
  const auto cs = build_coreset(rp, 4, 0);
  EXPECT_EQ(enumerate_outlier_subsets(cs, 2).size(), 11u);
  EXPECT_EQ(enumerate_outlier_subsets(cs, 2), enumerate_outlier_subsets(cs, 2));
  EXPECT_THROW(enumerate_outlier_subsets(cs, 5), std::domain_error);
}

TEST(OutlierSubsets, ColorBudgetsFilterExactly) {
  Gen gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen.range(0, 9);
    const std::size_t colors = gen.range(1, 3);
    std::vector<std::uint32_t> entry_colors(n);
    for (auto& c : entry_colors) c = static_cast<std::uint32_t>(gen.index(colors));
    std::vector<std::size_t> budgets(colors);
    std::size_t m = 0;
    for (auto& b : budgets) m += (b = gen.range(0, 2));

    // Brute force over bitmasks.
    std::vector<std::vector<std::size_t>> expected;
    for (std::size_t size = 0; size <= m; ++size) {
      testing::for_each_combination(n, size, [&](const std::vector<std::size_t>& idx) {
        std::vector<std::size_t> used(colors, 0);
        for (auto i : idx) ++used[entry_colors[i]];
        for (std::size_t t = 0; t < colors; ++t) {
          if (used[t] > budgets[t]) return;
        }
        expected.push_back(idx);
      });
    }
    std::vector<std::vector<std::size_t>> seen;
    for_each_outlier_subset(n, m, entry_colors, budgets,
                            [&](std::span<const std::size_t> t) { seen.emplace_back(t.begin(), t.end()); });
    EXPECT_EQ(seen, expected);
    EXPECT_EQ(count_outlier_subsets(n, m, entry_colors, budgets, 1'000'000), expected.size());
    if (expected.size() > 2) EXPECT_EQ(count_outlier_subsets(n, m, entry_colors, budgets, 1), 2u);
  }
}

TEST(EvaluateCandidate, MatchesTrimmedCostAndBoundsTheOracle) {
  Gen gen(4);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(2, 9), .facilities = 4, .k = 2, .m = gen.range(0, 2)});
    const auto oracle = exact_outlier_oracle(inst);
    EXPECT_EQ(evaluate_candidate(oracle.centers, inst).cost, oracle.cost);
    const std::vector<PointId> C{inst.facilities[gen.index(4)], inst.facilities[gen.index(4)]};
    const auto s = evaluate_candidate(C, inst);
    EXPECT_EQ(s.cost, cost_m(inst.oracle(), inst.clients, C, inst.m, inst.z));
    EXPECT_EQ(s.outliers.size(), inst.m);
    EXPECT_GE(s.cost, oracle.cost * (1 - 1e-12));
    EXPECT_TRUE(std::is_sorted(s.centers.begin(), s.centers.end()));
  }
  auto inst = testing::line_instance({0}, {0}, 1, 0);
  EXPECT_THROW(evaluate_candidate({}, inst), std::domain_error);
}

TEST(SolveWithOutliers, NoOutliersMatchesExactKMedian) {
  Gen gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(1, 12), .facilities = 5, .k = 2, .m = 0});
    const auto report = solve_with_outliers(inst, lossless_options(inst));
    const auto direct = exact_kmedian(inst.oracle(), WeightedPointSet::unit(inst.clients), inst.facilities, 2, 1.0);
    EXPECT_TRUE(testing::close(report.best.cost, direct.cost));
  }
}

TEST(SolveWithOutliers, LosslessEqualsTheOracle) {
  Gen gen(6);
  for (int trial = 0; trial < 40; ++trial) {
    const double z = trial % 2 == 0 ? 1.0 : 2.0;
    auto inst = testing::random_instance(gen, {.clients = gen.range(2, 14), .facilities = gen.range(2, 5), .k = gen.range(1, 3), .m = gen.range(0, 2), .z = z, .clustered = gen.coin()});
    const auto report = solve_with_outliers(inst, lossless_options(inst, trial));
    ASSERT_TRUE(report.per_round.front().lossless);
    const auto oracle = exact_outlier_oracle(inst);
    EXPECT_TRUE(testing::close(report.best.cost, oracle.cost, 1e-9)) << report.best.cost << " vs " << oracle.cost;
  }
}

TEST(SolveWithOutliers, SolutionsAreAlwaysFeasibleAndExactlyCosted) {
  Gen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(20, 40), .facilities = 5, .k = 2, .m = gen.range(1, 2), .clustered = true});
    auto options = sampled_options(gen.range(1, 4), trial);
    if (trial % 3 == 0) options.solver.kind = SolverKind::local_search;
    const auto report = solve_with_outliers(inst, options);
    const auto& best = report.best;
    EXPECT_LE(best.centers.size(), inst.k);
    EXPECT_EQ(best.outliers.size(), inst.m);
    EXPECT_EQ(best.cost, cost_m(inst.oracle(), inst.clients, best.centers, inst.m, inst.z));
    EXPECT_EQ(best.outliers, farthest_m(inst.oracle(), inst.clients, best.centers, inst.m, inst.z));
    for (PointId c : best.centers) EXPECT_NE(std::find(inst.facilities.begin(), inst.facilities.end(), c), inst.facilities.end());
    EXPECT_GE(best.cost, exact_outlier_oracle(inst).cost * (1 - 1e-12));

    double min_round = std::numeric_limits<double>::infinity();
    for (const auto& r : report.per_round) min_round = std::min(min_round, r.best_cost);
    EXPECT_EQ(best.cost, min_round);
  }
}

TEST(SolveWithOutliers, MoreRoundsNeverHurt) {
  Gen gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 30, .facilities = 5, .k = 2, .m = 2, .clustered = true});
    auto options = sampled_options(2, 40 + trial);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t rounds = 1; rounds <= 4; ++rounds) {
      options.rounds = rounds;
      const double cost = solve_with_outliers(inst, options).best.cost;
      EXPECT_LE(cost, previous);
      previous = cost;
    }
  }
}

TEST(SolveWithOutliers, CandidateCountMatchesTheBinomialSum) {
  Gen gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 25, .facilities = 4, .k = 2, .m = gen.range(0, 2)});
    const auto report = solve_with_outliers(inst, sampled_options(3, trial));
    for (const auto& r : report.per_round) {
      EXPECT_EQ(r.subsets, binomial_prefix(r.coreset_size, inst.m));
      EXPECT_EQ(r.candidates_evaluated + r.candidates_refused, r.subsets);
      EXPECT_LE(r.coreset_size, r.coreset_size_bound);
    }
  }
}

TEST(SolveWithOutliers, ThreadsTableAndMemoDoNotChangeTheResult) {
  Gen gen(10);
  for (int trial = 0; trial < 8; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 24, .facilities = 5, .k = 2, .m = 2, .clustered = true});
    const auto base_options = sampled_options(3, 100 + trial);
    const auto reference = solve_with_outliers(inst, base_options);
    auto variants = std::vector<ReductionOptions>(4, base_options);
    variants[0].threads = 3;
    variants[1].table_budget = 0;
    variants[2].memoize_candidates = true;
    variants[3].threads = 2;
    variants[3].memoize_candidates = true;
    variants[3].table_budget = 0;
    for (const auto& v : variants) {
      const auto other = solve_with_outliers(inst, v);
      EXPECT_EQ(other.best.cost, reference.best.cost);
      EXPECT_EQ(other.best.centers, reference.best.centers);
      EXPECT_EQ(other.best.candidate_tag, reference.best.candidate_tag);
      ASSERT_EQ(other.per_round.size(), reference.per_round.size());
      for (std::size_t r = 0; r < other.per_round.size(); ++r) {
        EXPECT_EQ(other.per_round[r].best_tag, reference.per_round[r].best_tag);
        EXPECT_EQ(other.per_round[r].candidates_evaluated, reference.per_round[r].candidates_evaluated);
      }
    }
  }
}

TEST(SolveWithOutliers, SameSeedSameReport) {
  Gen gen(11);
  auto inst = testing::random_instance(gen, {.clients = 40, .facilities = 5, .k = 2, .m = 2, .clustered = true});
  const auto options = sampled_options(3, 5);
  const auto a = solve_with_outliers(inst, options);
  const auto b = solve_with_outliers(inst, options);
  EXPECT_EQ(a.best.centers, b.best.centers);
  EXPECT_EQ(a.best.candidate_tag, b.best.candidate_tag);
  for (std::size_t r = 0; r < a.per_round.size(); ++r) EXPECT_EQ(a.per_round[r].seed, b.per_round[r].seed);
  EXPECT_EQ(a.per_round[1].seed, round_seed(5, 1));
}

TEST(SolveWithOutliers, RefusalsAndBadOptions) {
  Gen gen(12);
  auto inst = testing::random_instance(gen, {.clients = 10, .facilities = 6, .k = 3, .m = 1});
  auto options = lossless_options(inst);
  options.solver.enumeration_budget = 5;
  EXPECT_THROW(solve_with_outliers(inst, options), BudgetExceeded);
  options = lossless_options(inst);
  options.max_subsets = 5;
  EXPECT_THROW(solve_with_outliers(inst, options), BudgetExceeded);
  options = lossless_options(inst);
  options.rounds = 0;
  EXPECT_THROW(solve_with_outliers(inst, options), std::invalid_argument);
  options = lossless_options(inst);
  options.coreset.practical_s.reset();
  EXPECT_THROW(solve_with_outliers(inst, options), std::invalid_argument);
}

TEST(SolveWithOutliers, ReportCarriesTheSharedBaseline) {
  Gen gen(13);
  auto inst = testing::random_instance(gen, {.clients = 12, .facilities = 3, .k = 1, .m = 1});
  auto options = lossless_options(inst);
  options.coreset.epsilon = 0.5;
  const auto report = solve_with_outliers(inst, options);
  EXPECT_TRUE(report.baseline_exact);
  EXPECT_EQ(report.tau, 1.0);
  EXPECT_DOUBLE_EQ(report.approximation_factor, 3.0);
  EXPECT_EQ(report.beta, 1.0);
  EXPECT_LE(report.baseline.size(), 2u);
  EXPECT_EQ(report.rounds, 1u);
  EXPECT_EQ(report.per_round.size(), 1u);
}

}  // namespace
}  // namespace oclust
