#include "oclust/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "oclust/cost.hpp"
#include "oclust/io.hpp"
#include "oclust/rng.hpp"

namespace oclust {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json ids_json(std::span<const PointId> ids) {
  json out = json::array();
  for (PointId p : ids) out.push_back(index_of(p));
  return out;
}

template <class T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

template <class T>
void read_if(const json& j, const char* key, std::optional<T>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct LoadedCase {
  std::string id;
  OutlierProblem problem;
  ParamsSpec params;
  std::uint64_t seed = 0;
};

LoadedCase load_case(const json& spec, const json& suite, const ParamsSpec& suite_params,
                     const std::filesystem::path& base_dir) {
  LoadedCase c;
  c.id = spec.at("id").get<std::string>();
  const std::uint64_t suite_seed = suite.value("seed", std::uint64_t{0});
  c.seed = spec.contains("seed") ? spec.at("seed").get<std::uint64_t>() : derive_seed(suite_seed, {fnv1a(c.id)});

  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  if (spec.contains("path")) {
    c.problem.instance = parse_instance(read_file(resolve(spec.at("path").get<std::string>())));
  } else if (spec.contains("planted")) {
    PlantedConfig config = planted_config_from_json(spec.at("planted"));
    if (!spec.at("planted").contains("seed")) config.seed = derive_seed(c.seed, {kGeneratorStream});
    c.problem.instance = generate_planted(config).instance;
  } else {
    throw std::invalid_argument("instance '" + c.id + "' needs a path or a planted config");
  }
  if (spec.contains("colors")) {
    const auto colorful = attach_colors(c.problem.instance, parse_colors(read_file(resolve(spec.at("colors").get<std::string>()))));
    c.problem = colorful.problem();
  }
  if (spec.contains("matroid")) {
    c.problem.matroid = parse_matroid(read_file(resolve(spec.at("matroid").get<std::string>())));
  }
  c.problem.validate();
  c.params = spec.contains("params") ? params_from_json(spec.at("params"), suite_params) : suite_params;
  return c;
}

ExperimentRow run_case(const LoadedCase& c, std::uint64_t oracle_budget, bool timing) {
  ExperimentRow row;
  row.id = c.id;
  row.seed = c.seed;
  const auto& inst = c.problem.instance;
  const CenterConstraint constraint = c.problem.constraint();
  const std::size_t k = constraint.target_size(sorted_unique(inst.facilities));
  ReductionOptions options = c.params.resolve(inst.clients.size(), k, inst.m);
  options.seed = c.seed;
  row.params = to_json(options);

  const auto start = std::chrono::steady_clock::now();
  const ReductionReport report = solve_problem(c.problem, options);
  if (timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  // Ratios come from a fresh evaluation, never from the driver's tallies.
  const Solution evaluated = evaluate_candidate(report.best.centers, c.problem);
  row.framework_cost = evaluated.cost;
  row.rounds = report.rounds;
  row.candidates_evaluated = report.candidates_evaluated;
  row.coreset_size = report.per_round.empty() ? 0 : report.per_round.front().coreset_size;

  if (c.problem.colorful()) {
    std::vector<std::size_t> used(c.problem.color_budgets.size(), 0);
    for (PointId y : evaluated.outliers) {
      const auto it = std::find(inst.clients.begin(), inst.clients.end(), y);
      ++used[c.problem.client_colors[static_cast<std::size_t>(it - inst.clients.begin())]];
    }
    for (std::size_t t = 0; t < used.size(); ++t) row.budgets_respected &= used[t] <= c.problem.color_budgets[t];
  } else {
    row.budgets_respected = evaluated.outliers.size() <= inst.m;
  }
  row.independent = constraint.admits(evaluated.centers) && evaluated.centers.size() <= k;

  try {
    const Solution oracle = exact_constrained_outlier_oracle(inst, constraint, c.problem.client_colors,
                                                             c.problem.color_budgets, oracle_budget);
    row.oracle_cost = oracle.cost;
    if (oracle.cost > 0.0) {
      row.ratio = row.framework_cost / oracle.cost;
    } else if (row.framework_cost == 0.0) {
      row.ratio = 1.0;
    }
  } catch (const BudgetExceeded&) {
    row.oracle_skipped = true;
  }
  return row;
}

}  // namespace

void PlantedConfig::validate() const {
  if (clusters == 0 || points_per_cluster == 0) throw std::invalid_argument("clusters and points_per_cluster must be positive");
  if (!(spread > 0.0)) throw std::invalid_argument("spread must be positive");
  if (!(outlier_distance_factor > 0.0)) throw std::invalid_argument("outlier_distance_factor must be positive");
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  if (!(separation >= 0.0)) throw std::invalid_argument("separation must be nonnegative");
  if (!(facility_fraction > 0.0 && facility_fraction <= 1.0)) {
    throw std::invalid_argument("facility_fraction must lie in (0, 1]");
  }
}

PlantedInstance generate_planted(const PlantedConfig& config) {
  config.validate();
  const std::size_t d = config.dimension;
  const std::size_t clustered = config.clusters * config.points_per_cluster;
  const std::size_t total = clustered + config.outlier_count;
  Rng rng(derive_seed(config.seed, {kGeneratorStream}));

  PlantedInstance out;
  std::vector<double> coords;
  coords.reserve(total * d);
  for (std::size_t c = 0; c < config.clusters; ++c) {
    std::vector<double> center(d);
    for (double& x : center) x = (2.0 * uniform_unit(rng) - 1.0) * config.separation;
    out.centers.push_back(std::move(center));
  }
  for (std::size_t c = 0; c < config.clusters; ++c) {
    for (std::size_t i = 0; i < config.points_per_cluster; ++i) {
      double sq = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double offset = config.spread * standard_normal(rng);
        coords.push_back(out.centers[c][a] + offset);
        sq += offset * offset;
      }
      out.max_spread = std::max(out.max_spread, std::sqrt(sq));
      out.labels.push_back(c);
    }
  }
  // Every cluster center lies within separation * sqrt(d) of the origin.
  const double reach = config.separation * std::sqrt(static_cast<double>(d));
  const double gap = config.outlier_distance_factor * std::max(out.max_spread, config.spread);
  for (std::size_t o = 0; o < config.outlier_count; ++o) {
    std::vector<double> direction(d);
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (double& x : direction) {
        x = standard_normal(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
    }
    const double radius = (reach + gap) * (1.0 + uniform_unit(rng));
    for (double x : direction) coords.push_back(x / norm * radius);
    out.labels.push_back(config.clusters);
  }

  MetricInstance& inst = out.instance;
  inst.metric = std::make_shared<EuclideanDistance>(d, std::move(coords));
  inst.clients = point_range(0, total);
  if (config.facility_fraction >= 1.0) {
    inst.facilities = inst.clients;
  } else {
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(config.facility_fraction * static_cast<double>(total))));
    std::vector<PointId> pool = inst.clients;
    Rng pick(derive_seed(config.seed, {kGeneratorStream, 1}));
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + uniform_index(pick, total - i)]);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    inst.facilities = std::move(pool);
  }
  inst.k = config.k.value_or(config.clusters);
  inst.m = config.m.value_or(config.outlier_count);
  inst.z = config.z;
  inst.validate();
  return out;
}

PlantedConfig planted_config_from_json(const json& j) {
  PlantedConfig c;
  read_if(j, "clusters", c.clusters);
  read_if(j, "points_per_cluster", c.points_per_cluster);
  read_if(j, "spread", c.spread);
  read_if(j, "outlier_count", c.outlier_count);
  read_if(j, "outlier_distance_factor", c.outlier_distance_factor);
  read_if(j, "dimension", c.dimension);
  read_if(j, "seed", c.seed);
  read_if(j, "separation", c.separation);
  read_if(j, "facility_fraction", c.facility_fraction);
  read_if(j, "k", c.k);
  read_if(j, "m", c.m);
  read_if(j, "z", c.z);
  c.validate();
  return c;
}

json to_json(const PlantedConfig& c) {
  json j;
  j["clusters"] = c.clusters;
  j["points_per_cluster"] = c.points_per_cluster;
  j["spread"] = c.spread;
  j["outlier_count"] = c.outlier_count;
  j["outlier_distance_factor"] = c.outlier_distance_factor;
  j["dimension"] = c.dimension;
  j["seed"] = c.seed;
  j["separation"] = c.separation;
  j["facility_fraction"] = c.facility_fraction;
  j["k"] = c.k ? json(*c.k) : json(nullptr);
  j["m"] = c.m ? json(*c.m) : json(nullptr);
  j["z"] = c.z;
  return j;
}

json to_json(const Solution& s) {
  return json{{"centers", ids_json(s.centers)},
              {"outliers", ids_json(s.outliers)},
              {"cost", s.cost},
              {"candidate_tag", s.candidate_tag}};
}

json to_json(const ReductionOptions& o) {
  json j;
  j["epsilon"] = o.coreset.epsilon;
  j["lambda"] = o.coreset.lambda;
  j["tau"] = optional_json(o.coreset.tau);
  j["c"] = o.coreset.c_theory;
  j["c_prime"] = o.coreset.c_prime;
  j["mode"] = to_string(o.coreset.mode);
  j["s"] = o.coreset.practical_s ? json(*o.coreset.practical_s) : json(nullptr);
  j["solver"] = to_string(o.solver.kind);
  j["iteration_cap"] = o.solver.iteration_cap;
  j["improvement_threshold"] = o.solver.improvement_threshold;
  j["enumeration_budget"] = o.solver.enumeration_budget;
  j["restarts"] = o.solver.restarts;
  j["rounds"] = o.rounds;
  j["seed"] = o.seed;
  j["memoize_candidates"] = o.memoize_candidates;
  j["threads"] = o.threads;
  j["max_subsets"] = o.max_subsets;
  j["table_budget"] = o.table_budget;
  j["baseline_exact_max_centers"] = o.baseline.exact_max_centers;
  j["baseline_exact_budget"] = o.baseline.exact_budget;
  return j;
}

json to_json(const ReductionReport& r) {
  json rounds = json::array();
  for (const auto& s : r.per_round) {
    rounds.push_back(json{{"round", s.round},
                          {"seed", s.seed},
                          {"coreset_size", s.coreset_size},
                          {"coreset_size_bound", s.coreset_size_bound},
                          {"sample_size", s.sample_size},
                          {"rings", s.rings},
                          {"max_ring_size", s.max_ring_size},
                          {"lossless", s.lossless},
                          {"subsets", s.subsets},
                          {"candidates_evaluated", s.candidates_evaluated},
                          {"candidates_refused", s.candidates_refused},
                          {"best_cost", s.best_cost},
                          {"best_tag", s.best_tag}});
  }
  json j;
  j["best"] = to_json(r.best);
  j["candidates_evaluated"] = r.candidates_evaluated;
  j["candidates_refused"] = r.candidates_refused;
  j["rounds"] = r.rounds;
  j["per_round"] = std::move(rounds);
  j["baseline"] = json{{"centers", ids_json(r.baseline)},
                       {"cost", r.baseline_cost},
                       {"exact", r.baseline_exact},
                       {"converged", r.baseline_converged}};
  j["tau"] = r.tau;
  j["radius"] = r.radius;
  j["phi"] = r.phi;
  j["approximation_factor"] = r.approximation_factor;
  j["beta"] = optional_json(r.beta);
  return j;
}

std::uint64_t practical_sample_size(double factor, std::size_t n, std::size_t k, std::size_t m) {
  const double log_n = n > 0 ? std::log(static_cast<double>(n)) : 0.0;
  return std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(factor * (static_cast<double>(m) + static_cast<double>(k) * log_n))));
}

ReductionOptions ParamsSpec::resolve(std::size_t n, std::size_t k, std::size_t m) const {
  ReductionOptions out = options;
  if (s_factor) {
    out.coreset.mode = SizeMode::practical;
    out.coreset.practical_s = practical_sample_size(*s_factor, n, k, m);
  }
  return out;
}

ParamsSpec params_from_json(const json& j, ParamsSpec spec) {
  auto& o = spec.options;
  read_if(j, "epsilon", o.coreset.epsilon);
  read_if(j, "lambda", o.coreset.lambda);
  read_if(j, "tau", o.coreset.tau);
  read_if(j, "c", o.coreset.c_theory);
  read_if(j, "c_prime", o.coreset.c_prime);
  if (j.contains("mode")) o.coreset.mode = parse_size_mode(j.at("mode").get<std::string>());
  if (j.contains("s") && !j.at("s").is_null()) {
    o.coreset.practical_s = j.at("s").get<std::uint64_t>();
    spec.s_factor.reset();
  }
  read_if(j, "s_factor", spec.s_factor);
  if (j.contains("solver")) o.solver.kind = parse_solver_kind(j.at("solver").get<std::string>());
  read_if(j, "iteration_cap", o.solver.iteration_cap);
  read_if(j, "improvement_threshold", o.solver.improvement_threshold);
  read_if(j, "enumeration_budget", o.solver.enumeration_budget);
  read_if(j, "restarts", o.solver.restarts);
  read_if(j, "rounds", o.rounds);
  read_if(j, "memoize_candidates", o.memoize_candidates);
  read_if(j, "threads", o.threads);
  read_if(j, "max_subsets", o.max_subsets);
  read_if(j, "table_budget", o.table_budget);
  read_if(j, "baseline_exact_max_centers", o.baseline.exact_max_centers);
  read_if(j, "baseline_exact_budget", o.baseline.exact_budget);
  return spec;
}

ExperimentReport run_experiment(const json& suite, const std::filesystem::path& base_dir, bool timing) {
  ExperimentReport report;
  report.name = suite.value("name", std::string("suite"));
  ParamsSpec defaults;
  defaults.options.memoize_candidates = true;
  const ParamsSpec suite_params = suite.contains("params") ? params_from_json(suite.at("params"), defaults) : defaults;
  const std::uint64_t oracle_budget = suite.value("oracle_budget", kDefaultEnumerationBudget);
  const std::size_t threads = std::max<std::size_t>(1, suite.value("threads", std::size_t{1}));

  std::vector<LoadedCase> cases;
  if (suite.contains("instances")) {
    for (const auto& spec : suite.at("instances")) cases.push_back(load_case(spec, suite, suite_params, base_dir));
  }
  std::vector<std::string> ids;
  for (const auto& c : cases) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw std::invalid_argument("duplicate instance ids");

  report.rows.resize(cases.size());
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < cases.size(); i += threads) report.rows[i] = run_case(cases[i], oracle_budget, timing);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  auto& s = report.summary;
  s.rows = report.rows.size();
  s.ratio_threshold = suite.value("ratio_threshold",
                                  (1.0 + suite_params.options.coreset.epsilon) /
                                      (1.0 - suite_params.options.coreset.epsilon));
  s.min_success_fraction = suite.value("min_success_fraction", 1.0);
  if (suite.contains("max_ratio")) s.max_ratio_bound = suite.at("max_ratio").get<double>();

  double ratio_sum = 0.0;
  std::size_t successes = 0;
  bool ratios_sane = true;
  s.max_ratio = 1.0;
  for (const auto& row : report.rows) {
    s.feasible &= row.budgets_respected && row.independent;
    if (!row.oracle_cost) continue;
    ++s.oracle_rows;
    const double ratio = row.ratio.value_or(std::numeric_limits<double>::infinity());
    ratio_sum += ratio;
    s.max_ratio = std::max(s.max_ratio, ratio);
    if (ratio <= s.ratio_threshold) ++successes;
    if (ratio < 1.0 - 1e-9) ratios_sane = false;
  }
  if (s.oracle_rows > 0) {
    s.mean_ratio = ratio_sum / static_cast<double>(s.oracle_rows);
    s.success_fraction = static_cast<double>(successes) / static_cast<double>(s.oracle_rows);
  }
  s.passed = s.feasible && ratios_sane && s.success_fraction >= s.min_success_fraction &&
             (!s.max_ratio_bound || s.max_ratio <= *s.max_ratio_bound);
  return report;
}

json to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row{{"id", r.id},
             {"oracle_cost", optional_json(r.oracle_cost)},
             {"oracle_skipped", r.oracle_skipped},
             {"framework_cost", r.framework_cost},
             {"ratio", optional_json(r.ratio)},
             {"rounds", r.rounds},
             {"seed", r.seed},
             {"candidates_evaluated", r.candidates_evaluated},
             {"coreset_size", r.coreset_size},
             {"budgets_respected", r.budgets_respected},
             {"independent", r.independent},
             {"params", r.params}};
    if (r.wall_ms) row["wall_ms"] = *r.wall_ms;
    rows.push_back(std::move(row));
  }
  const auto& s = report.summary;
  json summary{{"rows", s.rows},
               {"oracle_rows", s.oracle_rows},
               {"mean_ratio", std::isfinite(s.mean_ratio) ? json(s.mean_ratio) : json(nullptr)},
               {"max_ratio", std::isfinite(s.max_ratio) ? json(s.max_ratio) : json(nullptr)},
               {"ratio_threshold", s.ratio_threshold},
               {"success_fraction", s.success_fraction},
               {"min_success_fraction", s.min_success_fraction},
               {"max_ratio_bound", optional_json(s.max_ratio_bound)},
               {"feasible", s.feasible},
               {"passed", s.passed}};
  return json{{"name", report.name}, {"rows", std::move(rows)}, {"summary", std::move(summary)}};
}

}  // namespace oclust
