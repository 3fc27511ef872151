#include <gtest/gtest.h>

#include "oclust/cost.hpp"
#include "oclust/solvers.hpp"
#include "test_support.hpp"

namespace oclust {
namespace {

using testing::Gen;

/// Weighted outlier-free cost written out independently.
double direct_weighted_cost(const DistanceOracle& metric, const WeightedPointSet& s, const std::vector<PointId>& c,
                            double z) {
  double sum = 0.0;
  for (const auto& e : s.entries) sum += testing::zpow(testing::nearest(metric, e.point, c), z) * static_cast<double>(e.weight);
  return sum;
}

WeightedPointSet random_weights(Gen& gen, const std::vector<PointId>& points, std::uint64_t max_weight) {
  WeightedPointSet s;
  for (PointId p : points) s.entries.push_back({p, gen.range(1, max_weight)});
  return s;
}

TEST(ExpandUnweighted, CopiesByWeight) {
  const auto unit = WeightedPointSet::unit(point_range(0, 3));
  EXPECT_EQ(expand_unweighted(unit), point_range(0, 3));
  WeightedPointSet triple{{{point_id(4), 3}}};
  EXPECT_EQ(expand_unweighted(triple), (std::vector<PointId>{point_id(4), point_id(4), point_id(4)}));
}

TEST(ExpandUnweighted, PreservesCost) {
  Gen gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(1, 8), .facilities = 4});
    const auto s = random_weights(gen, inst.clients, 5);
    const auto expanded = expand_unweighted(s);
    EXPECT_EQ(expanded.size(), s.total_weight());
    std::vector<PointId> c{inst.facilities[gen.index(4)], inst.facilities[gen.index(4)]};
    const double z = trial % 2 == 0 ? 1.0 : 2.0;
    EXPECT_TRUE(testing::close(wcost_t(inst.oracle(), s, c, 0, z), cost_m(inst.oracle(), expanded, c, 0, z)));
  }
}

TEST(ExactKMedian, Examples) {
  auto line = testing::line_instance({0, 1, 10}, {0, 10}, 1, 0);
  auto r = exact_kmedian(line.oracle(), WeightedPointSet::unit(line.clients), line.facilities, 1, 1.0);
  EXPECT_EQ(r.centers, std::vector<PointId>{point_id(3)});
  EXPECT_EQ(r.cost, 11.0);

  auto weighted = testing::line_instance({0, 10}, {0, 10}, 1, 0);
  WeightedPointSet s{{{point_id(0), 5}, {point_id(1), 1}}};
  r = exact_kmedian(weighted.oracle(), s, weighted.facilities, 1, 1.0);
  EXPECT_EQ(r.centers, std::vector<PointId>{point_id(2)});
  EXPECT_EQ(r.cost, 10.0);

  r = exact_kmedian(line.oracle(), WeightedPointSet::unit(line.clients), line.facilities, 5, 1.0);
  EXPECT_EQ(r.centers, line.facilities);
}

TEST(ExactKMedian, TiesGoToTheSmallestTuple) {
  auto inst = testing::line_instance({0}, {-1, 1}, 1, 0);
  auto r = exact_kmedian(inst.oracle(), WeightedPointSet::unit(inst.clients), inst.facilities, 1, 1.0);
  EXPECT_EQ(r.centers, std::vector<PointId>{point_id(1)});
}

TEST(ExactKMedian, RefusesPastTheBudget) {
  Gen gen(1);
  auto inst = testing::random_instance(gen, {.clients = 4, .facilities = 10, .k = 3});
  EXPECT_THROW(exact_kmedian(inst.oracle(), WeightedPointSet::unit(inst.clients), inst.facilities, 3, 1.0, 100),
               BudgetExceeded);
  EXPECT_NO_THROW(exact_kmedian(inst.oracle(), WeightedPointSet::unit(inst.clients), inst.facilities, 3, 1.0, 120));
}

TEST(ExactKMedian, MatchesEnumerationOracle) {
  Gen gen(5);
  for (int trial = 0; trial < 60; ++trial) {
    const double z = trial % 2 == 0 ? 1.0 : 2.0;
    auto inst = testing::random_instance(gen, {.clients = gen.range(1, 9), .facilities = gen.range(1, 6), .k = gen.range(1, 3), .m = 0, .z = z});
    const auto s = random_weights(gen, inst.clients, 4);
    const auto r = exact_kmedian(inst.oracle(), s, inst.facilities, inst.k, z);
    double best = std::numeric_limits<double>::infinity();
    testing::for_each_combination(inst.facilities.size(), std::min(inst.k, inst.facilities.size()),
                                  [&](const std::vector<std::size_t>& idx) {
      std::vector<PointId> c;
      for (auto i : idx) c.push_back(inst.facilities[i]);
      best = std::min(best, direct_weighted_cost(inst.oracle(), s, c, z));
    });
    EXPECT_TRUE(testing::close(r.cost, best));
  }
}

TEST(ExactKMedian, ExpandedAndWeightedAgreeBitForBitOnIntegerCosts) {
  Gen gen(9);
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(1, 7), .facilities = 5, .k = 2, .dimension = 1, .grid = true});
    const auto s = random_weights(gen, inst.clients, 4);
    const auto weighted = exact_kmedian(inst.oracle(), s, inst.facilities, 2, 2.0);
    const auto expanded =
        exact_kmedian(inst.oracle(), WeightedPointSet::unit(expand_unweighted(s)), inst.facilities, 2, 2.0);
    EXPECT_EQ(weighted.cost, expanded.cost);
    EXPECT_EQ(weighted.centers, expanded.centers);
  }
}

TEST(ExactKMedian, ExpandedAndWeightedAgreeOnRealCosts) {
  Gen gen(10);
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(1, 7), .facilities = 5, .k = 2});
    const auto s = random_weights(gen, inst.clients, 4);
    const auto weighted = exact_kmedian(inst.oracle(), s, inst.facilities, 2, 1.0);
    const auto expanded =
        exact_kmedian(inst.oracle(), WeightedPointSet::unit(expand_unweighted(s)), inst.facilities, 2, 1.0);
    EXPECT_TRUE(testing::close(weighted.cost, expanded.cost));
  }
}

TEST(LocalSearch, OptimumIsAFixpoint) {
  Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 10, .facilities = 7, .k = 3});
    const auto pts = WeightedPointSet::unit(inst.clients);
    const auto opt = exact_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0);
    SolverHandle handle{SolverKind::local_search};
    const auto ls = local_search_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0, handle, opt.centers);
    EXPECT_EQ(ls.centers, opt.centers);
    EXPECT_EQ(ls.iterations, 0u);
    EXPECT_TRUE(ls.converged);
  }
}

TEST(LocalSearch, WithinFiveOfExactAndNeverBelow) {
  Gen gen(17);
  SolverHandle handle{SolverKind::local_search};
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(3, 14), .facilities = gen.range(3, 10), .k = gen.range(1, 3), .clustered = true});
    const auto pts = WeightedPointSet::unit(inst.clients);
    const auto opt = exact_kmedian(inst.oracle(), pts, inst.facilities, inst.k, 1.0);
    const auto ls = local_search_kmedian(inst.oracle(), pts, inst.facilities, inst.k, 1.0, handle);
    EXPECT_GE(ls.cost, opt.cost * (1 - 1e-12));
    EXPECT_LE(ls.cost, 5.0 * opt.cost * (1 + 1e-12));
  }
}

TEST(LocalSearch, NoImprovingSwapRemains) {
  Gen gen(19);
  SolverHandle handle{SolverKind::local_search};
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 12, .facilities = 6, .k = 2});
    const auto pts = WeightedPointSet::unit(inst.clients);
    const auto ls = local_search_kmedian(inst.oracle(), pts, inst.facilities, 2, 1.0, handle);
    ASSERT_TRUE(ls.converged);
    for (std::size_t pos = 0; pos < ls.centers.size(); ++pos) {
      for (PointId f : inst.facilities) {
        if (std::find(ls.centers.begin(), ls.centers.end(), f) != ls.centers.end()) continue;
        auto swapped = ls.centers;
        swapped[pos] = f;
        EXPECT_GE(direct_weighted_cost(inst.oracle(), pts, swapped, 1.0),
                  (1.0 - handle.improvement_threshold) * ls.cost * (1 - 1e-12));
      }
    }
  }
}

TEST(LocalSearch, DeterministicAndStartsFromFirstFacilities) {
  Gen gen(23);
  auto inst = testing::random_instance(gen, {.clients = 15, .facilities = 8, .k = 3});
  const auto pts = WeightedPointSet::unit(inst.clients);
  SolverHandle handle{SolverKind::local_search};
  const auto a = local_search_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0, handle);
  const auto b = local_search_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0, handle);
  const std::vector<PointId> first(inst.facilities.begin(), inst.facilities.begin() + 3);
  const auto c = local_search_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0, handle, first);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_EQ(a.centers, c.centers);
}

TEST(LocalSearch, IterationCapReportsNonConvergence) {
  // Starting from the two leftmost facilities, reaching the right cluster takes a swap.
  auto inst = testing::line_instance({0, 0.5, 100, 100.5}, {0, 0.2, 100}, 2, 0);
  const auto pts = WeightedPointSet::unit(inst.clients);
  SolverHandle handle{SolverKind::local_search};
  handle.iteration_cap = 1;
  handle.improvement_threshold = 1e-3;
  const std::vector<PointId> start{point_id(4), point_id(5)};
  auto r = local_search_kmedian(inst.oracle(), pts, inst.facilities, 2, 1.0, handle, start);
  EXPECT_EQ(r.iterations, 1u);
  handle.iteration_cap = 0;
  r = local_search_kmedian(inst.oracle(), pts, inst.facilities, 2, 1.0, handle, start);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.centers, start);
}

TEST(LocalSearch, RestartsNeverHurt) {
  Gen gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 14, .facilities = 9, .k = 3, .clustered = true});
    const auto pts = WeightedPointSet::unit(inst.clients);
    SolverHandle plain{SolverKind::local_search};
    SolverHandle restarted = plain;
    restarted.restarts = 4;
    restarted.seed = 99;
    EXPECT_LE(local_search_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0, restarted).cost,
              local_search_kmedian(inst.oracle(), pts, inst.facilities, 3, 1.0, plain).cost);
  }
}

TEST(SolverHandle, BetaGuarantee) {
  EXPECT_EQ(SolverHandle{SolverKind::exact}.beta_guarantee(2.0), 1.0);
  EXPECT_EQ(SolverHandle{SolverKind::local_search}.beta_guarantee(1.0), 5.0);
  EXPECT_FALSE(SolverHandle{SolverKind::local_search}.beta_guarantee(2.0).has_value());
  EXPECT_EQ(parse_solver_kind("local-search"), SolverKind::local_search);
  EXPECT_THROW(parse_solver_kind("lp"), std::invalid_argument);
}

TEST(OutlierOracle, Examples) {
  auto inst = testing::line_instance({0, 1, 10, 50}, {0, 10}, 1, 1);
  const auto s = exact_outlier_oracle(inst);
  EXPECT_EQ(s.centers, std::vector<PointId>{point_id(4)});
  EXPECT_EQ(s.outliers, std::vector<PointId>{point_id(3)});
  EXPECT_EQ(s.cost, 11.0);
  EXPECT_EQ(s.candidate_tag, "oracle");

  inst.m = 4;
  EXPECT_EQ(exact_outlier_oracle(inst).cost, 0.0);
  EXPECT_EQ(exact_outlier_oracle(inst).centers.size(), 1u);
}

TEST(OutlierOracle, NoOutliersMatchesExactKMedian) {
  Gen gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(1, 9), .facilities = gen.range(1, 5), .k = gen.range(1, 3), .m = 0});
    const auto a = exact_outlier_oracle(inst);
    const auto b = exact_kmedian(inst.oracle(), WeightedPointSet::unit(inst.clients), inst.facilities, inst.k, 1.0);
    EXPECT_TRUE(testing::close(a.cost, b.cost));
  }
}

TEST(OutlierOracle, MatchesBruteForceAndLowerBoundsEveryCandidate) {
  Gen gen(37);
  for (int trial = 0; trial < 60; ++trial) {
    const double z = trial % 2 == 0 ? 1.0 : 2.0;
    auto inst = testing::random_instance(gen, {.clients = gen.range(2, 9), .facilities = gen.range(1, 5), .k = gen.range(1, 2), .m = gen.range(0, 2), .z = z});
    const auto s = exact_outlier_oracle(inst);
    EXPECT_TRUE(testing::close(s.cost, testing::brute_opt(inst)));
    EXPECT_TRUE(testing::close(s.cost, cost_m(inst.oracle(), inst.clients, s.centers, inst.m, z)));
    for (PointId f : inst.facilities) {
      const std::vector<PointId> c{f};
      EXPECT_LE(s.cost, cost_m(inst.oracle(), inst.clients, c, inst.m, z) * (1 + 1e-12));
    }
  }
}

}  // namespace
}  // namespace oclust
