// oclust: generate instances, solve them with outliers, run exact oracles and
// experiment suites, and inspect coresets and rings.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "oclust/bench.hpp"
#include "oclust/coreset.hpp"
#include "oclust/extensions.hpp"
#include "oclust/io.hpp"
#include "oclust/reduction.hpp"

namespace {

using nlohmann::json;
using namespace oclust;

struct ProblemFlags {
  std::string instance;
  std::string colors;
  std::string matroid;

  void add(CLI::App* app) {
    app->add_option("--instance", instance, "Instance file")->required()->check(CLI::ExistingFile);
    app->add_option("--colors", colors, "Color file")->check(CLI::ExistingFile);
    app->add_option("--matroid", matroid, "Matroid file")->check(CLI::ExistingFile);
  }

  OutlierProblem load() const {
    OutlierProblem problem;
    problem.instance = parse_instance(read_file(instance));
    if (!colors.empty()) problem = attach_colors(problem.instance, parse_colors(read_file(colors))).problem();
    if (!matroid.empty()) problem.matroid = parse_matroid(read_file(matroid));
    problem.validate();
    return problem;
  }
};

struct ParamFlags {
  double epsilon = 0.5;
  double lambda = 0.1;
  double tau = 1.0;
  double c = 1.0;
  double c_prime = 9.0;
  std::string mode = "practical";
  std::uint64_t s = 0;
  double s_factor = 8.0;
  std::string solver = "exact";
  std::size_t iteration_cap = 10'000;
  double improvement_threshold = 1e-3;
  std::uint64_t enumeration_budget = kDefaultEnumerationBudget;
  std::size_t restarts = 0;
  std::size_t rounds = default_rounds();
  std::size_t threads = 1;
  std::uint64_t max_subsets = 100'000'000;
  bool memoize = false;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* s_opt = nullptr;
  CLI::Option* s_factor_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Accuracy parameter in (0, 1)");
    app->add_option("--lambda", lambda, "Failure probability in (0, 1)");
    tau_opt = app->add_option("--tau", tau, "Baseline guarantee (default: reported by the baseline solver)");
    app->add_option("--c", c, "Constant c of the theory sample size");
    app->add_option("--c-prime", c_prime, "Constant c' of the theory sample size");
    app->add_option("--mode", mode, "Sample size mode")->check(CLI::IsMember({"theory", "practical"}));
    s_opt = app->add_option("--s", s, "Per-ring sample size (practical mode)");
    s_factor_opt = app->add_option("--s-factor", s_factor, "Practical s = ceil(factor (m + k ln n))");
    app->add_option("--solver", solver, "Black-box solver")
        ->check(CLI::IsMember({"exact", "local-search", "local_search"}));
    app->add_option("--iteration-cap", iteration_cap, "Local search iteration cap");
    app->add_option("--improvement-threshold", improvement_threshold, "Local search improvement threshold");
    app->add_option("--enumeration-budget", enumeration_budget, "Exact solver enumeration budget");
    app->add_option("--restarts", restarts, "Local search random restarts");
    app->add_option("--rounds", rounds, "Independent rounds");
    app->add_option("--threads", threads, "Worker threads per round");
    app->add_option("--max-subsets", max_subsets, "Refuse rounds with more outlier subsets");
    app->add_flag("--memoize", memoize, "Reuse evaluations of repeated center sets");
  }

  ReductionOptions resolve(const OutlierProblem& problem, std::uint64_t seed) const {
    ParamsSpec spec;
    auto& o = spec.options;
    o.coreset.epsilon = epsilon;
    o.coreset.lambda = lambda;
    if (tau_opt->count() > 0) o.coreset.tau = tau;
    o.coreset.c_theory = c;
    o.coreset.c_prime = c_prime;
    o.coreset.mode = parse_size_mode(mode);
    if (s_opt->count() > 0) {
      o.coreset.practical_s = s;
    } else if (o.coreset.mode == SizeMode::practical) {
      spec.s_factor = s_factor;
    }
    o.solver.kind = parse_solver_kind(solver);
    o.solver.iteration_cap = iteration_cap;
    o.solver.improvement_threshold = improvement_threshold;
    o.solver.enumeration_budget = enumeration_budget;
    o.solver.restarts = restarts;
    o.solver.seed = seed;
    o.rounds = rounds;
    o.threads = threads;
    o.max_subsets = max_subsets;
    o.memoize_candidates = memoize;
    o.seed = seed;
    const auto& inst = problem.instance;
    const std::size_t k = problem.constraint().target_size(sorted_unique(inst.facilities));
    return spec.resolve(inst.clients.size(), k, inst.m);
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering with outliers via coreset enumeration"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "Write a planted instance");
  PlantedConfig planted;
  std::size_t planted_k = 0;
  std::size_t planted_m = 0;
  std::string generate_out;
  std::string labels_out;
  generate->add_option("--clusters", planted.clusters);
  generate->add_option("--points-per-cluster", planted.points_per_cluster);
  generate->add_option("--spread", planted.spread);
  generate->add_option("--outliers", planted.outlier_count);
  generate->add_option("--outlier-factor", planted.outlier_distance_factor);
  generate->add_option("--dimension", planted.dimension);
  generate->add_option("--separation", planted.separation);
  generate->add_option("--facility-fraction", planted.facility_fraction);
  auto* k_opt = generate->add_option("--k", planted_k, "Default: number of clusters");
  auto* m_opt = generate->add_option("--m", planted_m, "Default: number of outliers");
  generate->add_option("--z", planted.z);
  generate->add_option("--seed", planted.seed)->required();
  generate->add_option("--out", generate_out, "Instance file (default: stdout)");
  generate->add_option("--labels", labels_out, "Write ground-truth labels as JSON");

  // solve
  auto* solve = app.add_subcommand("solve", "Run the reduction and write a JSON report");
  ProblemFlags solve_problem_flags;
  ParamFlags solve_params;
  std::uint64_t solve_seed = 0;
  std::string solve_out;
  solve_problem_flags.add(solve);
  solve_params.add(solve);
  solve->add_option("--seed", solve_seed)->required();
  solve->add_option("--out", solve_out, "Report file (default: stdout)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Brute-force optimum with outliers");
  ProblemFlags oracle_problem_flags;
  std::uint64_t oracle_budget = kDefaultEnumerationBudget;
  std::string oracle_out;
  oracle_problem_flags.add(oracle);
  oracle->add_option("--budget", oracle_budget, "Center-set enumeration budget");
  oracle->add_option("--out", oracle_out);

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a suite against the exact oracles");
  std::string suite_path;
  std::uint64_t experiment_seed = 0;
  std::string experiment_out;
  bool timing = false;
  experiment->add_option("--suite", suite_path)->required()->check(CLI::ExistingFile);
  experiment->add_option("--seed", experiment_seed)->required();
  experiment->add_option("--out", experiment_out);
  experiment->add_flag("--timing", timing, "Record wall times (reports are then not reproducible)");

  // coreset-dump
  auto* dump = app.add_subcommand("coreset-dump", "Write the coreset of one round");
  ProblemFlags dump_problem_flags;
  ParamFlags dump_params;
  std::uint64_t dump_seed = 0;
  std::size_t dump_round = 0;
  std::string dump_out;
  dump_problem_flags.add(dump);
  dump_params.add(dump);
  dump->add_option("--seed", dump_seed)->required();
  dump->add_option("--round", dump_round);
  dump->add_option("--out", dump_out);

  // check-rings
  auto* rings = app.add_subcommand("check-rings", "Verify the ring-sum bounds of the baseline rings");
  ProblemFlags rings_problem_flags;
  ParamFlags rings_params;
  std::string rings_out;
  rings_problem_flags.add(rings);
  rings_params.add(rings);
  rings->add_option("--out", rings_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      if (k_opt->count() > 0) planted.k = planted_k;
      if (m_opt->count() > 0) planted.m = planted_m;
      const PlantedInstance result = generate_planted(planted);
      emit(generate_out, write_instance(result.instance));
      if (!labels_out.empty()) {
        json labels{{"config", to_json(planted)}, {"labels", result.labels}, {"centers", result.centers},
                    {"max_spread", result.max_spread}};
        write_file(labels_out, labels.dump(2) + "\n");
      }
      return EXIT_SUCCESS;
    }
    if (*solve) {
      const OutlierProblem problem = solve_problem_flags.load();
      const ReductionOptions options = solve_params.resolve(problem, solve_seed);
      const ReductionReport report = solve_problem(problem, options);
      json j = to_json(report);
      j["params"] = to_json(options);
      emit(solve_out, j.dump(2) + "\n");
      return EXIT_SUCCESS;
    }
    if (*oracle) {
      const OutlierProblem problem = oracle_problem_flags.load();
      const Solution best = exact_constrained_outlier_oracle(problem.instance, problem.constraint(),
                                                             problem.client_colors, problem.color_budgets,
                                                             oracle_budget);
      emit(oracle_out, to_json(best).dump(2) + "\n");
      return EXIT_SUCCESS;
    }
    if (*experiment) {
      json suite = json::parse(read_file(suite_path));
      suite["seed"] = experiment_seed;
      const auto base_dir = std::filesystem::path(suite_path).parent_path();
      const ExperimentReport report = run_experiment(suite, base_dir, timing);
      emit(experiment_out, to_json(report).dump(2) + "\n");
      if (!report.summary.passed) {
        std::cerr << "experiment thresholds violated\n";
        return 2;
      }
      return EXIT_SUCCESS;
    }
    if (*dump) {
      const OutlierProblem problem = dump_problem_flags.load();
      const ReductionOptions options = dump_params.resolve(problem, dump_seed);
      const PreparedRings prepared = prepare_rings(problem, options);
      const WeightedCoreset coreset =
          build_coreset(prepared.rings, prepared.sample_size, round_seed(options.seed, dump_round));
      emit(dump_out, write_coreset(make_dump(prepared.rings, coreset)));
      return EXIT_SUCCESS;
    }
    if (*rings) {
      const OutlierProblem problem = rings_problem_flags.load();
      const ReductionOptions options = rings_params.resolve(problem, 0);
      const PreparedRings prepared = prepare_rings(problem, options);
      const RingBoundReport bounds = verify_ring_bounds(prepared.rings, problem.instance.oracle());
      json j{{"radius", prepared.rings.radius},
             {"phi", prepared.rings.phi},
             {"tau", prepared.rings.tau},
             {"baseline_cost", prepared.rings.baseline_cost},
             {"rings", prepared.rings.nonempty_rings()},
             {"radius_sum", bounds.radius_sum},
             {"radius_bound", bounds.radius_bound},
             {"diameter_sum", bounds.diameter_sum},
             {"diameter_bound", bounds.diameter_bound},
             {"passed", bounds.passed}};
      emit(rings_out, j.dump(2) + "\n");
      return bounds.passed ? EXIT_SUCCESS : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
