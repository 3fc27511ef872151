#include "oclust/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "oclust/cost.hpp"
#include "oclust/rng.hpp"

namespace oclust {

namespace {

__extension__ typedef unsigned __int128 uint128;

constexpr double kUnitRoundoff = 0x1.0p-53;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  return (a > cap || b > cap - std::min(a, cap)) ? cap + 1 : a + b;
}

std::string subset_tag(std::size_t round, std::span<const std::size_t> subset) {
  std::string tag = "round=" + std::to_string(round) + ";T=[";
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i > 0) tag += ',';
    tag += std::to_string(subset[i]);
  }
  tag += ']';
  return tag;
}

/// Entry-level costs of every admissible center set: values[c * n + e] is
/// w(e) * d(e, C_c)^z, computed exactly as the exact solver computes them.
struct CandidateTable {
  std::vector<std::size_t> family;  // flattened index tuples, `width` each
  std::size_t width = 0;
  std::size_t entries = 0;
  std::vector<double> values;
  std::vector<double> totals;
  double max_total = 0.0;

  std::size_t sets() const { return width == 0 ? 0 : family.size() / width; }
};

CandidateTable build_table(const DistanceOracle& metric, const WeightedPointSet& points,
                           std::span<const PointId> facilities, double z, std::vector<std::size_t> family, std::size_t width) {
  CandidateTable table;
  table.family = std::move(family);
  table.width = width;
  table.entries = points.size();
  std::vector<PointId> rows;
  rows.reserve(points.size());
  for (const auto& e : points.entries) rows.push_back(e.point);
  const CostTable costs(metric, rows, facilities, z);
  const std::size_t sets = table.sets();
  const std::size_t n = table.entries;
  table.values.resize(sets * n);
  table.totals.resize(sets);
  for (std::size_t c = 0; c < sets; ++c) {
    const std::size_t* idx = table.family.data() + c * width;
    double total = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < width; ++j) best = std::min(best, costs(e, idx[j]));
      const double v = best * static_cast<double>(points.entries[e].weight);
      table.values[c * n + e] = v;
      total += v;
    }
    table.totals[c] = total;
    table.max_total = std::max(table.max_total, total);
  }
  return table;
}

/// argmin over the table of the cost of S \ T. A cheap subtraction screens
/// the sets; the survivors are summed directly so the choice matches the
/// exact solver run on S \ T.
std::size_t table_argmin(const CandidateTable& table, std::span<const std::size_t> removed,
                         std::vector<double>& approx, std::vector<char>& skip) {
  const std::size_t sets = table.sets();
  const std::size_t n = table.entries;
  approx.resize(sets);
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < sets; ++c) {
    double dropped = 0.0;
    for (std::size_t e : removed) dropped += table.values[c * n + e];
    approx[c] = table.totals[c] - dropped;
    lowest = std::min(lowest, approx[c]);
  }
  const double slack = 8.0 * static_cast<double>(n + removed.size() + 2) * kUnitRoundoff * table.max_total;
  skip.assign(n, 0);
  for (std::size_t e : removed) skip[e] = 1;
  std::size_t best = sets;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < sets; ++c) {
    if (approx[c] > lowest + slack) continue;
    double sum = 0.0;
    const double* row = table.values.data() + c * n;
    for (std::size_t e = 0; e < n; ++e) {
      if (!skip[e]) sum += row[e];
    }
    if (best == sets || sum < best_cost) {
      best = c;
      best_cost = sum;
    }
  }
  return best;
}

struct Incumbent {
  bool valid = false;
  double cost = std::numeric_limits<double>::infinity();
  std::uint64_t ordinal = 0;
  std::vector<PointId> centers;
  std::string tag;

  bool beats(const Incumbent& other) const {
    if (!valid) return false;
    if (!other.valid) return true;
    if (cost != other.cost) return cost < other.cost;
    return ordinal < other.ordinal;
  }
};

struct WorkerResult {
  Incumbent best;
  std::uint64_t evaluated = 0;
  std::uint64_t refused = 0;
};

struct RoundContext {
  const OutlierProblem* problem = nullptr;
  const ReductionOptions* options = nullptr;
  const WeightedCoreset* coreset = nullptr;
  WeightedPointSet points;
  std::vector<std::uint32_t> entry_colors;
  std::vector<PointId> facilities;  // sorted, unique
  CenterConstraint constraint = CenterConstraint::cardinality(1);
  const CandidateTable* table = nullptr;
  std::size_t round = 0;
  std::size_t m = 0;
};

double trimmed_cost(const OutlierProblem& problem, std::span<const PointId> centers) {
  const auto& inst = problem.instance;
  return evaluate_trimmed(inst.oracle(), inst.clients, centers, inst.z, inst.m, problem.client_colors,
                          problem.color_budgets)
      .cost;
}

WorkerResult run_worker(const RoundContext& ctx, std::size_t worker, std::size_t workers) {
  WorkerResult out;
  const auto& problem = *ctx.problem;
  const auto& options = *ctx.options;
  const Matroid* matroid = problem.matroid.get();
  std::map<std::vector<PointId>, double> memo;
  std::vector<double> approx;
  std::vector<char> skip;
  std::vector<PointId> centers;
  std::uint64_t ordinal = 0;

  for_each_outlier_subset(ctx.points.size(), ctx.m, ctx.entry_colors, problem.color_budgets,
                          [&](std::span<const std::size_t> subset) {
    const std::uint64_t current = ordinal++;
    if (current % workers != worker) return;

    centers.clear();
    if (ctx.table != nullptr) {
      const std::size_t c = table_argmin(*ctx.table, subset, approx, skip);
      const std::size_t* idx = ctx.table->family.data() + c * ctx.table->width;
      for (std::size_t j = 0; j < ctx.table->width; ++j) centers.push_back(ctx.facilities[idx[j]]);
    } else {
      WeightedPointSet rest;
      rest.entries.reserve(ctx.points.size() - subset.size());
      std::size_t next = 0;
      for (std::size_t e = 0; e < ctx.points.size(); ++e) {
        if (next < subset.size() && subset[next] == e) {
          ++next;
          continue;
        }
        rest.entries.push_back(ctx.points.entries[e]);
      }
      try {
        auto result = solve_outlier_free(problem.instance.oracle(), rest, ctx.facilities, ctx.constraint,
                                         problem.instance.z, options.solver);
        centers = std::move(result.centers);
      } catch (const BudgetExceeded&) {
        ++out.refused;
        return;
      } catch (const std::domain_error&) {
        ++out.refused;
        return;
      }
    }
    std::sort(centers.begin(), centers.end());
    if (matroid != nullptr && !matroid->is_independent(centers)) {
      throw std::logic_error("black box returned a dependent center set");
    }

    double cost;
    if (options.memoize_candidates) {
      auto it = memo.find(centers);
      if (it == memo.end()) it = memo.emplace(centers, trimmed_cost(problem, centers)).first;
      cost = it->second;
    } else {
      cost = trimmed_cost(problem, centers);
    }
    ++out.evaluated;
    if (!out.best.valid || cost < out.best.cost) {
      out.best.valid = true;
      out.best.cost = cost;
      out.best.ordinal = current;
      out.best.centers = centers;
      out.best.tag = subset_tag(ctx.round, subset);
    }
  });
  return out;
}

}  // namespace

void OutlierProblem::validate() const {
  instance.validate();
  if (colorful()) {
    if (client_colors.size() != instance.clients.size()) {
      throw std::invalid_argument("one color per client is required");
    }
    if (color_budgets.empty()) throw std::invalid_argument("colors need budgets");
    std::vector<std::size_t> class_size(color_budgets.size(), 0);
    for (std::uint32_t c : client_colors) {
      if (c >= color_budgets.size()) throw std::invalid_argument("client color without a budget");
      ++class_size[c];
    }
    std::size_t total = 0;
    for (std::size_t t = 0; t < color_budgets.size(); ++t) {
      if (color_budgets[t] > class_size[t]) {
        throw std::invalid_argument("budget of color " + std::to_string(t) + " exceeds its class size");
      }
      total += color_budgets[t];
    }
    if (total != instance.m) throw std::invalid_argument("color budgets must sum to m");
  } else if (!color_budgets.empty()) {
    throw std::invalid_argument("budgets given without client colors");
  }
  if (matroid) {
    const auto& ground = matroid->ground_set();
    for (PointId f : instance.facilities) {
      if (std::find(ground.begin(), ground.end(), f) == ground.end()) {
        throw std::invalid_argument("facility outside the matroid ground set");
      }
    }
    // The baseline matroid is a direct sum over F and X, so the two must not share ids.
    for (PointId x : instance.clients) {
      if (std::find(ground.begin(), ground.end(), x) != ground.end()) {
        throw std::invalid_argument("matroid variant needs clients disjoint from the matroid ground set");
      }
    }
    if (matroid->rank_of(instance.facilities) == 0) {
      throw std::domain_error("matroid has no independent set of positive rank");
    }
  }
}

CenterConstraint OutlierProblem::constraint() const {
  if (matroid) return CenterConstraint::independent_in(matroid);
  return CenterConstraint::cardinality(instance.k);
}

std::size_t default_rounds() { return static_cast<std::size_t>(std::ceil(std::log2(1.0 / 0.05))); }

std::uint64_t count_outlier_subsets(std::size_t entry_count, std::size_t m,
                                    std::span<const std::uint32_t> entry_colors,
                                    std::span<const std::size_t> budgets, std::uint64_t cap) {
  // Generating polynomial per color, truncated at degree m, saturating at cap + 1.
  std::vector<std::size_t> class_size;
  std::vector<std::size_t> class_budget;
  if (budgets.empty()) {
    class_size.push_back(entry_count);
    class_budget.push_back(m);
  } else {
    if (entry_colors.size() != entry_count) throw std::invalid_argument("one color per entry is required");
    class_size.assign(budgets.size(), 0);
    for (std::uint32_t c : entry_colors) {
      if (c >= budgets.size()) throw std::invalid_argument("entry color without a budget");
      ++class_size[c];
    }
    class_budget.assign(budgets.begin(), budgets.end());
  }
  const std::uint64_t limit = cap + 1;
  auto clamp = [&](uint128 v) -> std::uint64_t { return v > limit ? limit : static_cast<std::uint64_t>(v); };
  std::vector<std::uint64_t> poly(m + 1, 0);
  poly[0] = 1;
  for (std::size_t t = 0; t < class_size.size(); ++t) {
    const std::size_t top = std::min({class_budget[t], class_size[t], m});
    std::vector<std::uint64_t> binom(top + 1, 0);
    uint128 b = 1;
    for (std::size_t i = 0; i <= top; ++i) {
      binom[i] = clamp(b);
      // C(n, i+1) = C(n, i) (n - i) / (i + 1); once clamped the value stays clamped.
      if (b <= limit) b = b * (class_size[t] - i) / (i + 1);
    }
    std::vector<std::uint64_t> next(m + 1, 0);
    for (std::size_t a = 0; a <= m; ++a) {
      if (poly[a] == 0) continue;
      for (std::size_t i = 0; i <= top && a + i <= m; ++i) {
        next[a + i] = clamp(static_cast<uint128>(next[a + i]) +
                            static_cast<uint128>(poly[a]) * binom[i]);
      }
    }
    poly = std::move(next);
  }
  std::uint64_t total = 0;
  for (std::uint64_t v : poly) total = saturating_add(total, v, cap);
  return std::min(total, limit);
}

std::uint64_t for_each_outlier_subset(std::size_t entry_count, std::size_t m,
                                      std::span<const std::uint32_t> entry_colors,
                                      std::span<const std::size_t> budgets,
                                      const std::function<void(std::span<const std::size_t>)>& visit) {
  const bool colored = !budgets.empty();
  if (colored && entry_colors.size() != entry_count) throw std::invalid_argument("one color per entry is required");
  const std::size_t top = std::min(m, entry_count);
  std::vector<std::size_t> subset;
  std::vector<std::size_t> used(budgets.size(), 0);
  std::uint64_t visited = 0;

  for (std::size_t size = 0; size <= top; ++size) {
    subset.clear();
    auto recurse = [&](auto&& self, std::size_t start) -> void {
      if (subset.size() == size) {
        ++visited;
        visit(std::span<const std::size_t>(subset));
        return;
      }
      const std::size_t needed = size - subset.size();
      for (std::size_t i = start; i + needed <= entry_count; ++i) {
        if (colored) {
          const std::uint32_t c = entry_colors[i];
          if (c >= budgets.size()) throw std::invalid_argument("entry color without a budget");
          if (used[c] == budgets[c]) continue;
          ++used[c];
        }
        subset.push_back(i);
        self(self, i + 1);
        subset.pop_back();
        if (colored) --used[entry_colors[i]];
      }
    };
    recurse(recurse, 0);
  }
  return visited;
}

std::vector<std::vector<std::size_t>> enumerate_outlier_subsets(const WeightedCoreset& coreset, std::size_t m) {
  if (m > coreset.size()) throw std::domain_error("m exceeds the number of coreset entries");
  std::vector<std::vector<std::size_t>> out;
  for_each_outlier_subset(coreset.size(), m, {}, {}, [&](std::span<const std::size_t> subset) {
    out.emplace_back(subset.begin(), subset.end());
  });
  return out;
}

Solution evaluate_candidate(std::span<const PointId> centers, const OutlierProblem& problem) {
  if (centers.empty()) throw std::domain_error("empty center set");
  const auto& inst = problem.instance;
  Solution out;
  out.centers.assign(centers.begin(), centers.end());
  std::sort(out.centers.begin(), out.centers.end());
  auto eval = evaluate_trimmed(inst.oracle(), inst.clients, out.centers, inst.z, inst.m, problem.client_colors,
                               problem.color_budgets);
  out.cost = eval.cost;
  out.outliers = std::move(eval.outliers);
  out.candidate_tag = "direct";
  return out;
}

Solution evaluate_candidate(std::span<const PointId> centers, const MetricInstance& inst) {
  OutlierProblem problem;
  problem.instance = inst;
  return evaluate_candidate(centers, problem);
}

PreparedRings prepare_rings(const OutlierProblem& problem, const ReductionOptions& options) {
  problem.validate();
  const auto& inst = problem.instance;
  CoresetParams params = options.coreset;
  params.z = inst.z;
  params.validate();

  PreparedRings out;
  out.k = problem.constraint().target_size(sorted_unique(inst.facilities));
  const MetricInstance augmented = build_augmented_instance(inst);
  std::optional<CenterConstraint> baseline_constraint;
  if (problem.matroid) {
    baseline_constraint = CenterConstraint::independent_in(direct_sum_matroid(problem.matroid, inst.clients, inst.m));
  }
  out.baseline = baseline_solve(augmented, options.baseline, baseline_constraint);
  const double tau = params.tau.value_or(out.baseline.tau);
  out.rings = ring_partition(inst, out.baseline.centers, tau, problem.client_colors);
  out.sample_size = params.sample_size(inst.clients.size(), out.k, inst.m, tau);
  return out;
}

std::uint64_t round_seed(std::uint64_t seed, std::size_t round) { return derive_seed(seed, {kRoundStream, round}); }

ReductionReport solve_problem(const OutlierProblem& problem, const ReductionOptions& options) {
  if (options.rounds == 0) throw std::invalid_argument("rounds must be at least 1");
  if (options.threads == 0) throw std::invalid_argument("threads must be at least 1");
  const auto& inst = problem.instance;
  const CenterConstraint constraint = problem.constraint();
  const auto facilities = sorted_unique(inst.facilities);
  const std::size_t n = inst.clients.size();

  // The baseline and the rings depend only on the instance; rounds differ in
  // the samples drawn.
  const PreparedRings prepared = prepare_rings(problem, options);
  const Baseline& baseline = prepared.baseline;
  const RingPartition& rings = prepared.rings;
  const double tau = rings.tau;
  const std::size_t k = prepared.k;
  const std::uint64_t s = prepared.sample_size;

  ReductionReport report;
  report.rounds = options.rounds;
  report.baseline = baseline.centers;
  report.baseline_cost = rings.baseline_cost;
  report.baseline_exact = baseline.exact;
  report.baseline_converged = baseline.converged;
  report.tau = tau;
  report.radius = rings.radius;
  report.phi = rings.phi;
  report.approximation_factor = (1.0 + options.coreset.epsilon) / (1.0 - options.coreset.epsilon);
  report.beta = options.solver.beta_guarantee(inst.z);
  if (problem.matroid && options.solver.kind != SolverKind::exact) report.beta.reset();

  // Center sets admissible for the exact black box, shared by all rounds.
  std::optional<std::vector<std::size_t>> family;
  bool family_refused = false;
  if (options.solver.kind == SolverKind::exact) {
    std::vector<std::size_t> flat;
    try {
      for_each_center_set(facilities, constraint, options.solver.enumeration_budget,
                          [&](std::span<const std::size_t> idx) { flat.insert(flat.end(), idx.begin(), idx.end()); });
      family = std::move(flat);
    } catch (const BudgetExceeded&) {
      family_refused = true;
    }
  }

  Incumbent global;
  for (std::size_t r = 0; r < options.rounds; ++r) {
    const std::uint64_t seed_r = round_seed(options.seed, r);
    const WeightedCoreset coreset = build_coreset(rings, s, seed_r);

    RoundSummary summary;
    summary.round = r;
    summary.seed = seed_r;
    summary.coreset_size = coreset.size();
    summary.coreset_size_bound = coreset_size_bound(s, k, inst.m, tau, n, problem.color_count());
    summary.sample_size = s;
    summary.rings = rings.nonempty_rings();
    summary.max_ring_size = rings.max_ring_size();
    summary.lossless = std::all_of(coreset.small.begin(), coreset.small.end(), [](const auto& kv) { return kv.second; });

    RoundContext ctx;
    ctx.problem = &problem;
    ctx.options = &options;
    ctx.coreset = &coreset;
    ctx.points = coreset.union_set();
    ctx.facilities = facilities;
    ctx.constraint = constraint;
    ctx.round = r;
    ctx.m = inst.m;
    if (problem.colorful()) {
      for (const auto& e : coreset.entries) ctx.entry_colors.push_back(e.ring.color);
    }

    summary.subsets = count_outlier_subsets(ctx.points.size(), std::min(inst.m, ctx.points.size()), ctx.entry_colors,
                                            problem.color_budgets, options.max_subsets);
    if (summary.subsets > options.max_subsets) {
      throw BudgetExceeded("outlier-subset enumeration exceeds the limit of " + std::to_string(options.max_subsets));
    }
    if (family_refused) {
      throw BudgetExceeded("every candidate was refused: center-set enumeration exceeds the budget of " +
                           std::to_string(options.solver.enumeration_budget));
    }

    std::optional<CandidateTable> table;
    if (family) {
      const std::uint64_t sets = k == 0 ? 0 : family->size() / k;
      if (sets * ctx.points.size() <= options.table_budget) {
        table = build_table(inst.oracle(), ctx.points, facilities, inst.z, *family, k);
        ctx.table = &*table;
      }
    }

    std::vector<WorkerResult> results(options.threads);
    if (options.threads == 1) {
      results[0] = run_worker(ctx, 0, 1);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(options.threads);
      for (std::size_t w = 0; w < options.threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            results[w] = run_worker(ctx, w, options.threads);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    Incumbent round_best;
    for (const auto& res : results) {
      summary.candidates_evaluated += res.evaluated;
      summary.candidates_refused += res.refused;
      if (res.best.beats(round_best)) round_best = res.best;
    }
    if (!round_best.valid) throw std::runtime_error("every candidate was refused by the black box");
    summary.best_cost = round_best.cost;
    summary.best_tag = round_best.tag;
    report.candidates_evaluated += summary.candidates_evaluated;
    report.candidates_refused += summary.candidates_refused;
    report.per_round.push_back(std::move(summary));
    if (!global.valid || round_best.cost < global.cost) {
      global = std::move(round_best);
    }
  }

  report.best = evaluate_candidate(global.centers, problem);
  report.best.candidate_tag = global.tag;
  return report;
}

ReductionReport solve_with_outliers(const MetricInstance& inst, const ReductionOptions& options) {
  OutlierProblem problem;
  problem.instance = inst;
  return solve_problem(problem, options);
}

}  // namespace oclust
