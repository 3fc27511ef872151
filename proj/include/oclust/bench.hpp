#pragma once

// Planted-instance generation, JSON reports and the experiment runner behind
// the command-line tool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oclust/extensions.hpp"
#include "oclust/metric.hpp"
#include "oclust/reduction.hpp"

namespace oclust {

struct PlantedConfig {
  std::size_t clusters = 2;
  std::size_t points_per_cluster = 10;
  double spread = 1.0;
  std::size_t outlier_count = 0;
  double outlier_distance_factor = 10.0;
  std::size_t dimension = 2;
  std::uint64_t seed = 0;
  /// Cluster centers are drawn uniformly from [-separation, separation]^d.
  double separation = 20.0;
  /// Fraction of points that also act as facilities; 1 keeps every point.
  double facility_fraction = 1.0;
  /// Instance parameters; k defaults to `clusters`, m to `outlier_count`.
  std::optional<std::size_t> k;
  std::optional<std::size_t> m;
  double z = 1.0;

  void validate() const;
};

struct PlantedInstance {
  MetricInstance instance;
  /// Cluster index per point; outliers get `clusters`.
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> centers;
  /// Largest distance of a cluster point from its own center.
  double max_spread = 0.0;
};

/// Gaussian clusters followed by outliers at distance at least
/// outlier_distance_factor * max_spread from every cluster center. Points are
/// numbered cluster by cluster, outliers last.
PlantedInstance generate_planted(const PlantedConfig& config);

PlantedConfig planted_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlantedConfig& config);

nlohmann::json to_json(const Solution& solution);
nlohmann::json to_json(const ReductionOptions& options);
nlohmann::json to_json(const ReductionReport& report);

/// Reads the keys the CLI and the suite files share: epsilon, lambda, tau,
/// c, c_prime, mode, s, s_factor, solver, iteration_cap,
/// improvement_threshold, enumeration_budget, restarts, rounds,
/// memoize_candidates, threads, max_subsets. s_factor sets
/// s = ceil(s_factor (m + k ln n)) once the instance is known.
struct ParamsSpec {
  ReductionOptions options;
  std::optional<double> s_factor;

  ReductionOptions resolve(std::size_t n, std::size_t k, std::size_t m) const;
};

ParamsSpec params_from_json(const nlohmann::json& j, ParamsSpec defaults = {});

/// ceil(factor (m + k ln n)).
std::uint64_t practical_sample_size(double factor, std::size_t n, std::size_t k, std::size_t m);

struct ExperimentRow {
  std::string id;
  std::optional<double> oracle_cost;
  bool oracle_skipped = false;
  double framework_cost = 0.0;
  std::optional<double> ratio;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::uint64_t candidates_evaluated = 0;
  std::size_t coreset_size = 0;
  bool budgets_respected = true;
  bool independent = true;
  std::optional<double> wall_ms;
  nlohmann::json params;
};

struct ExperimentSummary {
  std::size_t rows = 0;
  std::size_t oracle_rows = 0;
  double mean_ratio = 1.0;
  double max_ratio = 1.0;
  double ratio_threshold = 1.0;
  double success_fraction = 1.0;
  double min_success_fraction = 1.0;
  std::optional<double> max_ratio_bound;
  bool feasible = true;
  bool passed = true;
};

struct ExperimentReport {
  std::string name;
  std::vector<ExperimentRow> rows;  // sorted by id
  ExperimentSummary summary;
};

/// Runs a suite described in JSON:
///   { "name": .., "seed": .., "ratio_threshold": .., "min_success_fraction": ..,
///     "max_ratio": .., "oracle_budget": .., "threads": .., "params": {..},
///     "instances": [ {"id": .., "path": .. | "planted": {..},
///                     "colors": path?, "matroid": path?, "params": {..}?} ] }
/// Relative paths resolve against `base_dir`. Wall times are recorded only
/// when `timing` is set so that reports stay byte-identical across runs.
ExperimentReport run_experiment(const nlohmann::json& suite, const std::filesystem::path& base_dir, bool timing);

nlohmann::json to_json(const ExperimentReport& report);

}  // namespace oclust
