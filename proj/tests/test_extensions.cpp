#include <gtest/gtest.h>

#include "oclust/cost.hpp"
#include "oclust/extensions.hpp"
#include "test_support.hpp"

namespace oclust {
namespace {

using testing::Gen;

ReductionOptions lossless_options(std::size_t n, std::uint64_t seed = 3) {
  ReductionOptions o;
  o.coreset.practical_s = std::max<std::size_t>(1, n);
  o.seed = seed;
  o.rounds = 1;
  return o;
}

ColorfulInstance random_colorful(Gen& gen, std::size_t n, std::size_t colors, std::size_t max_budget) {
  ColorfulInstance c;
  c.base = testing::random_instance(gen, {.clients = n, .facilities = gen.range(2, 4), .k = gen.range(1, 2), .clustered = gen.coin()});
  c.colors.resize(n);
  for (auto& x : c.colors) x = static_cast<std::uint32_t>(gen.index(colors));
  c.budgets.assign(colors, 0);
  std::vector<std::size_t> sizes(colors, 0);
  for (auto x : c.colors) ++sizes[x];
  c.base.m = 0;
  for (std::size_t t = 0; t < colors; ++t) {
    c.budgets[t] = std::min(sizes[t], gen.range(0, max_budget));
    c.base.m += c.budgets[t];
  }
  return c;
}

std::shared_ptr<PartitionMatroid> random_partition(Gen& gen, const std::vector<PointId>& facilities) {
  std::vector<PartitionMatroid::Part> parts(gen.range(1, 3));
  for (PointId f : facilities) parts[gen.index(parts.size())].members.push_back(f);
  for (auto& p : parts) p.capacity = gen.range(1, 2);
  return std::make_shared<PartitionMatroid>(std::move(parts));
}

void expect_budgets_respected(const ColorfulInstance& c, const Solution& s) {
  std::vector<std::size_t> used(c.budgets.size(), 0);
  for (PointId y : s.outliers) {
    const auto it = std::find(c.base.clients.begin(), c.base.clients.end(), y);
    ASSERT_NE(it, c.base.clients.end());
    ++used[c.colors[static_cast<std::size_t>(it - c.base.clients.begin())]];
  }
  for (std::size_t t = 0; t < used.size(); ++t) EXPECT_LE(used[t], c.budgets[t]);
}

TEST(KzSolve, ZOneIsTheBaseReduction) {
  Gen gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(4, 25), .facilities = 4, .k = 2, .m = gen.range(0, 2), .clustered = true});
    ReductionOptions options;
    options.coreset.practical_s = gen.range(1, 5);
    options.seed = static_cast<std::uint64_t>(trial);
    options.rounds = 2;
    const auto a = kz_solve_with_outliers(inst, options);
    const auto b = solve_with_outliers(inst, options);
    EXPECT_EQ(a.best.cost, b.best.cost);
    EXPECT_EQ(a.best.centers, b.best.centers);
    EXPECT_EQ(a.best.candidate_tag, b.best.candidate_tag);
  }
}

TEST(KzSolve, SquaredLosslessEqualsTheOracle) {
  Gen gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(2, 16), .facilities = gen.range(2, 4), .k = gen.range(1, 2), .m = gen.range(0, 2), .z = 2.0, .clustered = gen.coin()});
    const auto report = kz_solve_with_outliers(inst, lossless_options(inst.clients.size()));
    EXPECT_TRUE(testing::close(report.best.cost, testing::brute_opt(inst), 1e-9));
  }
  auto inst = testing::line_instance({0}, {0}, 1, 0, 0.5);
  EXPECT_THROW(kz_solve_with_outliers(inst, lossless_options(1)), std::invalid_argument);
}

TEST(KzSolve, RelaxedTriangleOnSampledTriples) {
  Gen gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = 10, .facilities = 0, .dimension = gen.range(1, 3)});
    auto graph = testing::random_graph_metric(gen, 10);
    for (int t = 0; t < 20; ++t) {
      const PointId p = point_id(static_cast<std::uint32_t>(gen.index(10)));
      const PointId q = point_id(static_cast<std::uint32_t>(gen.index(10)));
      const PointId r = point_id(static_cast<std::uint32_t>(gen.index(10)));
      for (double z : {1.0, 2.0, 3.0}) {
        EXPECT_TRUE(relaxed_triangle_holds(inst.oracle(), p, q, r, z));
        EXPECT_TRUE(relaxed_triangle_holds(*graph, p, q, r, z));
      }
    }
  }
  // Squared distances on a line violate the plain triangle inequality but not the relaxed one.
  auto line = testing::line_instance({0, 1, 2}, {}, 1, 0);
  EXPECT_TRUE(relaxed_triangle_holds(line.oracle(), point_id(0), point_id(2), point_id(1), 2.0));
}

TEST(Colorful, SingleColorIsTheBaseReduction) {
  Gen gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_colorful(gen, gen.range(3, 20), 1, 2);
    ReductionOptions options;
    options.coreset.practical_s = gen.range(1, 4);
    options.seed = static_cast<std::uint64_t>(trial);
    options.rounds = 2;
    const auto a = colorful_solve(c, options);
    const auto b = solve_with_outliers(c.base, options);
    EXPECT_EQ(a.best.cost, b.best.cost);
    EXPECT_EQ(a.best.centers, b.best.centers);
  }
}

TEST(Colorful, TwoColorsLosslessEqualsTheOracle) {
  Gen gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    auto c = random_colorful(gen, gen.range(2, 14), 2, 2);
    const auto report = colorful_solve(c, lossless_options(c.base.clients.size()));
    const double brute = testing::brute_opt(c.base, c.colors, c.budgets, [](const std::vector<PointId>&) { return true; }, c.base.k);
    EXPECT_TRUE(testing::close(report.best.cost, brute, 1e-9));
    EXPECT_TRUE(testing::close(colorful_oracle(c).cost, brute));
    expect_budgets_respected(c, report.best);
    EXPECT_TRUE(testing::close(report.best.cost, testing::brute_colorful_cost(c.base.oracle(), c.base.clients, c.colors,
                                                                              c.budgets, report.best.centers, 1.0)));
  }
}

TEST(Colorful, BudgetsRespectedWhenSampled) {
  Gen gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_colorful(gen, gen.range(20, 40), 3, 1);
    ReductionOptions options;
    options.coreset.practical_s = gen.range(1, 3);
    options.seed = static_cast<std::uint64_t>(trial);
    options.rounds = 2;
    const auto report = colorful_solve(c, options);
    expect_budgets_respected(c, report.best);
    EXPECT_EQ(report.best.outliers.size(), c.base.m);
    for (const auto& r : report.per_round) EXPECT_LE(r.coreset_size, r.coreset_size_bound);
  }
}

TEST(Colorful, ZeroBudgetsArePlainKMedian) {
  Gen gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = random_colorful(gen, gen.range(2, 12), 2, 0);
    ASSERT_EQ(c.base.m, 0u);
    const auto report = colorful_solve(c, lossless_options(c.base.clients.size()));
    const auto direct =
        exact_kmedian(c.base.oracle(), WeightedPointSet::unit(c.base.clients), c.base.facilities, c.base.k, 1.0);
    EXPECT_TRUE(testing::close(report.best.cost, direct.cost));
    EXPECT_TRUE(report.best.outliers.empty());
  }
}

TEST(Colorful, InvalidBudgets) {
  Gen gen(8);
  auto c = random_colorful(gen, 6, 2, 1);
  auto bad = c;
  bad.budgets = {7, 0};
  bad.base.m = 7;
  EXPECT_THROW(colorful_solve(bad, lossless_options(6)), std::invalid_argument);
  bad = c;
  bad.base.m += 1;
  EXPECT_THROW(colorful_solve(bad, lossless_options(6)), std::invalid_argument);
  bad = c;
  bad.colors[0] = 5;
  EXPECT_THROW(colorful_solve(bad, lossless_options(6)), std::invalid_argument);
}

TEST(MatroidMedian, UniformMatroidIsTheBaseReduction) {
  Gen gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(3, 20), .facilities = 5, .k = gen.range(1, 3), .m = gen.range(0, 2)});
    auto uniform = std::make_shared<UniformMatroid>(inst.facilities, inst.k);
    ReductionOptions options;
    options.coreset.practical_s = gen.range(1, 5);
    options.seed = static_cast<std::uint64_t>(trial);
    options.rounds = 2;
    const auto a = matroid_median_solve(inst, uniform, options);
    const auto b = solve_with_outliers(inst, options);
    EXPECT_EQ(a.best.cost, b.best.cost);
  }
}

TEST(MatroidMedian, PartitionLosslessEqualsTheOracle) {
  Gen gen(10);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(2, 12), .facilities = gen.range(2, 6), .m = gen.range(0, 2)});
    auto matroid = random_partition(gen, inst.facilities);
    const auto report = matroid_median_solve(inst, matroid, lossless_options(inst.clients.size()));
    const double brute = testing::brute_opt(inst, {}, {}, [&](const std::vector<PointId>& c) { return matroid->is_independent(c); },
                                            inst.facilities.size());
    EXPECT_TRUE(testing::close(report.best.cost, brute, 1e-9));
    EXPECT_TRUE(testing::close(matroid_oracle(inst, matroid).cost, brute));
    EXPECT_TRUE(matroid->is_independent(report.best.centers));
  }
}

TEST(MatroidMedian, SampledCandidatesStayIndependent) {
  Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testing::random_instance(gen, {.clients = gen.range(15, 40), .facilities = 6, .m = gen.range(1, 2), .clustered = true});
    auto matroid = random_partition(gen, inst.facilities);
    ReductionOptions options;
    options.coreset.practical_s = 2;
    options.seed = static_cast<std::uint64_t>(trial);
    options.rounds = 2;
    if (trial % 2 == 1) options.solver.kind = SolverKind::local_search;
    const auto report = matroid_median_solve(inst, matroid, options);
    EXPECT_TRUE(matroid->is_independent(report.best.centers));
    EXPECT_FALSE(report.best.centers.empty());
    if (trial % 2 == 1) EXPECT_FALSE(report.beta.has_value());
  }
}

TEST(MatroidMedian, ErrorCases) {
  Gen gen(12);
  auto inst = testing::random_instance(gen, {.clients = 5, .facilities = 3});
  auto empty_rank = std::make_shared<UniformMatroid>(inst.facilities, 0);
  EXPECT_THROW(matroid_median_solve(inst, empty_rank, lossless_options(5)), std::domain_error);
  auto shared = testing::random_instance(gen, {.clients = 5, .facilities = 3, .shared = true});
  auto over_clients = std::make_shared<UniformMatroid>(shared.facilities, 1);
  EXPECT_THROW(matroid_median_solve(shared, over_clients, lossless_options(5)), std::invalid_argument);
  auto elsewhere = std::make_shared<UniformMatroid>(point_range(100, 2), 1);
  EXPECT_THROW(matroid_median_solve(inst, elsewhere, lossless_options(5)), std::invalid_argument);
}

TEST(ColorfulMatroid, SingleColorUniformIsTheBaseReduction) {
  Gen gen(13);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = random_colorful(gen, gen.range(3, 15), 1, 2);
    auto uniform = std::make_shared<UniformMatroid>(c.base.facilities, c.base.k);
    const auto options = lossless_options(c.base.clients.size());
    EXPECT_EQ(colorful_matroid_solve(c, uniform, options).best.cost, solve_with_outliers(c.base, options).best.cost);
  }
}

TEST(ColorfulMatroid, LosslessEqualsTheCombinedOracle) {
  Gen gen(14);
  for (int trial = 0; trial < 30; ++trial) {
    auto c = random_colorful(gen, gen.range(2, 12), 2, 1);
    auto matroid = random_partition(gen, c.base.facilities);
    const auto report = colorful_matroid_solve(c, matroid, lossless_options(c.base.clients.size()));
    const double brute = testing::brute_opt(c.base, c.colors, c.budgets,
                                            [&](const std::vector<PointId>& s) { return matroid->is_independent(s); },
                                            c.base.facilities.size());
    EXPECT_TRUE(testing::close(report.best.cost, brute, 1e-9));
    EXPECT_TRUE(testing::close(colorful_matroid_oracle(c, matroid).cost, brute));
    EXPECT_TRUE(matroid->is_independent(report.best.centers));
    expect_budgets_respected(c, report.best);
  }
}

TEST(ColorfulMatroid, InfeasibleBudgets) {
  Gen gen(15);
  auto c = random_colorful(gen, 4, 2, 0);
  c.budgets = {3, 3};
  c.base.m = 6;
  auto matroid = std::make_shared<UniformMatroid>(c.base.facilities, 1);
  EXPECT_THROW(colorful_matroid_solve(c, matroid, lossless_options(4)), std::invalid_argument);
}

}  // namespace
}  // namespace oclust
