#include "oclust/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oclust/cost.hpp"
#include "oclust/rng.hpp"

namespace oclust {

namespace {

std::uint64_t saturate(double value) {
  if (!(value < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::ceil(value));
}

/// Smallest phi >= 0 with 2^phi >= x.
std::size_t ceil_log2(double x) {
  std::size_t phi = 0;
  while (std::ldexp(1.0, static_cast<int>(phi)) < x) ++phi;
  return phi;
}

double root(double value, double z) {
  if (z == 1.0) return value;
  if (z == 2.0) return std::sqrt(value);
  return std::pow(value, 1.0 / z);
}

double lemma_bound(double xi, double population, double diam_v, double dist_v, double z) {
  if (z == 1.0) return xi * population * (diam_v + dist_v);
  return std::pow(2.0, 2.0 * z + 2.0) * xi * population * (power(diam_v, z) + power(dist_v, z));
}

struct PopulationSide {
  std::vector<double> costs;
  std::vector<double> trimmed;  // trimmed[t] = cost_t(V, C)
  double bound = 0.0;
};

PopulationSide population_side(const DistanceOracle& metric, std::span<const PointId> population,
                               std::span<const PointId> centers, const LemmaParams& params, double diam_v,
                               double dist_v) {
  PopulationSide side;
  side.costs.reserve(population.size());
  for (PointId v : population) side.costs.push_back(point_cost(metric, v, centers, params.z));
  for (std::size_t t = 0; t <= params.q; ++t) side.trimmed.push_back(summ(side.costs, std::min(t, side.costs.size())));
  side.bound = lemma_bound(params.xi, static_cast<double>(population.size()), diam_v, dist_v, params.z);
  return side;
}

LemmaTrialStats sample_side(const DistanceOracle& metric, const PopulationSide& side, std::size_t population_size,
                            std::span<const PointId> sample, std::span<const PointId> centers,
                            const LemmaParams& params) {
  if (sample.empty()) throw std::domain_error("empty sample");
  std::vector<double> costs;
  costs.reserve(sample.size());
  for (PointId u : sample) costs.push_back(point_cost(metric, u, centers, params.z));
  const double weight = static_cast<double>(population_size) / static_cast<double>(sample.size());
  LemmaTrialStats stats;
  stats.bound = side.bound;
  for (std::size_t t = 0; t <= params.q && t <= population_size; ++t) {
    const std::size_t t_sample = t * sample.size() / population_size;
    const double weighted = weight * summ(costs, std::min(t_sample, costs.size()));
    const double deviation = std::abs(side.trimmed[t] - weighted);
    stats.max_deviation = std::max(stats.max_deviation, deviation);
    if (deviation > side.bound) stats.violated = true;
  }
  return stats;
}

}  // namespace

std::string to_string(SizeMode mode) { return mode == SizeMode::theory ? "theory" : "practical"; }

SizeMode parse_size_mode(const std::string& name) {
  if (name == "theory") return SizeMode::theory;
  if (name == "practical") return SizeMode::practical;
  throw std::invalid_argument("unknown size mode: " + name);
}

void CoresetParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  if (tau && !(*tau >= 1.0)) throw std::invalid_argument("tau must be >= 1");
  if (!(c_theory > 0.0)) throw std::invalid_argument("c must be positive");
  if (!(z >= 1.0)) throw std::invalid_argument("z must be >= 1");
  if (mode == SizeMode::practical && (!practical_s || *practical_s == 0)) {
    throw std::invalid_argument("practical mode needs a positive sample size s");
  }
}

std::uint64_t CoresetParams::sample_size(std::size_t n, std::size_t k, std::size_t m, double tau) const {
  if (mode == SizeMode::practical) {
    if (!practical_s || *practical_s == 0) throw std::invalid_argument("practical mode needs a positive sample size s");
    return *practical_s;
  }
  const double log_n = n > 0 ? std::log(static_cast<double>(n)) : 0.0;
  double factor = c_theory * tau * tau / (epsilon * epsilon);
  if (z > 1.0) factor *= std::pow(2.0, c_prime * z);
  const double s = factor * (static_cast<double>(m) + static_cast<double>(k) * log_n + std::log(1.0 / lambda));
  return std::max<std::uint64_t>(1, saturate(s));
}

double CoresetParams::xi(double tau) const {
  if (z == 1.0) return epsilon / (8.0 * tau);
  return epsilon / (std::pow(2.0, 9.0 * z) * tau);
}

double CoresetParams::lambda_prime(std::size_t n, std::size_t k, std::size_t m, std::size_t phi) const {
  const double n_pow_k = std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), static_cast<double>(k));
  return lambda / (n_pow_k * 4.0 * static_cast<double>(k + m) * static_cast<double>(1 + phi));
}

double CoresetParams::lemma_sample_size(double xi, double lambda_prime, std::size_t q) {
  return 4.0 / (xi * xi) * (static_cast<double>(q) + std::log(2.0 / lambda_prime));
}

std::size_t RingPartition::max_ring_size() const {
  std::size_t best = 0;
  for (const auto& [key, members] : rings) best = std::max(best, members.size());
  return best;
}

MetricInstance build_augmented_instance(const MetricInstance& inst) {
  MetricInstance out;
  out.metric = inst.metric;
  out.clients = inst.clients;
  std::vector<PointId> facilities = inst.facilities;
  facilities.insert(facilities.end(), inst.clients.begin(), inst.clients.end());
  out.facilities = sorted_unique(facilities);
  out.k = inst.k + inst.m;
  out.m = 0;
  out.z = inst.z;
  return out;
}

Baseline baseline_solve(const MetricInstance& augmented, const BaselineOptions& options,
                        const std::optional<CenterConstraint>& constraint) {
  augmented.validate();
  if (augmented.m != 0) throw std::invalid_argument("baseline instance must have no outliers");
  const CenterConstraint cons = constraint.value_or(CenterConstraint::cardinality(augmented.k));
  const auto facilities = sorted_unique(augmented.facilities);
  const auto points = WeightedPointSet::unit(augmented.clients);

  bool use_exact;
  if (options.force) {
    use_exact = *options.force == SolverKind::exact;
  } else {
    use_exact = cons.target_size(facilities) <= options.exact_max_centers &&
                count_center_sets(facilities, cons, options.exact_budget) <= options.exact_budget;
  }

  Baseline out;
  CenterResult result;
  if (use_exact) {
    result = exact_constrained(augmented.oracle(), points, facilities, cons, augmented.z, options.exact_budget);
    out.tau = 1.0;
  } else {
    result = local_search_constrained(augmented.oracle(), points, facilities, cons, augmented.z, options.local_search);
    out.tau = std::pow(5.0, augmented.z);
  }
  out.centers = std::move(result.centers);
  out.cost = result.cost;
  out.exact = use_exact;
  out.converged = result.converged;
  return out;
}

RingPartition ring_partition(const MetricInstance& inst, std::span<const PointId> baseline, double tau,
                             std::span<const std::uint32_t> client_colors) {
  if (baseline.empty()) throw std::domain_error("baseline center set must be nonempty");
  if (!(tau >= 1.0)) throw std::invalid_argument("tau must be >= 1");
  if (!client_colors.empty() && client_colors.size() != inst.clients.size()) {
    throw std::invalid_argument("one color per client is required");
  }
  const auto& metric = inst.oracle();
  const std::size_t n = inst.clients.size();

  RingPartition out;
  out.baseline.assign(baseline.begin(), baseline.end());
  out.tau = tau;
  out.z = inst.z;
  out.assignment.resize(n);

  std::vector<double> dist(n);
  for (std::size_t p = 0; p < n; ++p) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_center = 0;
    for (std::size_t c = 0; c < baseline.size(); ++c) {
      const double d = metric.distance(inst.clients[p], baseline[c]);
      if (d < best) {
        best = d;
        best_center = c;
      }
    }
    dist[p] = best;
    out.assignment[p] = best_center;
    out.baseline_cost += power(best, inst.z);
  }

  out.phi = ceil_log2(tau * static_cast<double>(n));
  if (out.baseline_cost > 0.0) {
    out.radius = root(out.baseline_cost / (tau * static_cast<double>(n)), inst.z);
  }

  for (std::size_t p = 0; p < n; ++p) {
    std::size_t band = 0;
    if (dist[p] > out.radius) {
      band = 1;
      while (dist[p] > std::ldexp(out.radius, static_cast<int>(band))) ++band;
    }
    out.phi = std::max(out.phi, band);
    const RingKey key{out.assignment[p], client_colors.empty() ? 0u : client_colors[p], band};
    out.rings[key].push_back(inst.clients[p]);
  }
  return out;
}

RingBoundReport verify_ring_bounds(const RingPartition& rings, const DistanceOracle& metric) {
  RingBoundReport report;
  const double z = rings.z;
  const double two_z = std::pow(2.0, z);
  for (const auto& [key, members] : rings.rings) {
    const double size = static_cast<double>(members.size());
    report.radius_sum += size * power(std::ldexp(rings.radius, static_cast<int>(key.band)), z);
    report.diameter_sum += size * power(diam(metric, members), z);
  }
  report.radius_bound = (1.0 + two_z) * rings.baseline_cost;
  report.diameter_bound = two_z * (1.0 + two_z) * rings.baseline_cost;
  report.passed = report.radius_sum <= report.radius_bound && report.diameter_sum <= report.diameter_bound;
  return report;
}

WeightedPointSet WeightedCoreset::union_set() const {
  WeightedPointSet out;
  out.entries.reserve(entries.size());
  for (const auto& e : entries) out.entries.push_back({e.point, e.weight});
  return out;
}

WeightedPointSet WeightedCoreset::group(const RingKey& key) const {
  WeightedPointSet out;
  for (const auto& e : entries) {
    if (e.ring == key) out.entries.push_back({e.point, e.weight});
  }
  return out;
}

WeightedCoreset build_coreset(const RingPartition& rings, std::uint64_t sample_size, std::uint64_t seed) {
  if (sample_size == 0) throw std::invalid_argument("sample size must be positive");
  WeightedCoreset out;
  out.sample_size = sample_size;
  out.seed = seed;
  for (const auto& [key, members] : rings.rings) {
    const std::uint64_t size = members.size();
    out.ring_sizes[key] = size;
    if (size <= sample_size) {
      out.small[key] = true;
      for (PointId p : members) out.entries.push_back({key, p, 1});
      continue;
    }
    out.small[key] = false;
    const std::uint64_t verbatim = size % sample_size;
    for (std::uint64_t i = 0; i < verbatim; ++i) out.entries.push_back({key, members[i], 1});
    const std::uint64_t pool = size - verbatim;
    const std::uint64_t weight = pool / sample_size;
    Rng rng(derive_seed(seed, {key.center, key.color, key.band}));
    for (std::uint64_t draw = 0; draw < sample_size; ++draw) {
      out.entries.push_back({key, members[verbatim + uniform_index(rng, pool)], weight});
    }
  }
  return out;
}

std::uint64_t coreset_size_bound(std::uint64_t sample_size, std::size_t k, std::size_t m, double tau, std::size_t n,
                                 std::size_t colors) {
  const double bound = 2.0 * static_cast<double>(sample_size) * static_cast<double>(k + m) *
                       static_cast<double>(std::max<std::size_t>(colors, 1)) *
                       static_cast<double>(1 + ceil_log2(tau * static_cast<double>(n)));
  return saturate(bound);
}

LemmaTrialStats lemma_deviation(const DistanceOracle& metric, std::span<const PointId> population,
                                std::span<const PointId> sample, std::span<const PointId> centers,
                                const LemmaParams& params) {
  if (population.empty()) throw std::domain_error("empty population");
  const auto side =
      population_side(metric, population, centers, params, diam(metric, population), set_dist(metric, population, centers));
  return sample_side(metric, side, population.size(), sample, centers, params);
}

LemmaReport sampling_lemma_check(const DistanceOracle& metric, std::span<const PointId> population,
                                 std::span<const PointId> centers, const LemmaParams& params, std::size_t trials,
                                 std::uint64_t seed) {
  if (!(params.xi > 0.0) || !(params.lambda_prime > 0.0 && params.lambda_prime < 1.0)) {
    throw std::invalid_argument("xi must be positive and lambda' must lie in (0, 1)");
  }
  if (trials == 0) throw std::invalid_argument("at least one trial is required");
  LemmaReport report;
  report.sample_size =
      static_cast<std::size_t>(std::ceil(CoresetParams::lemma_sample_size(params.xi, params.lambda_prime, params.q)));
  if (population.size() < report.sample_size) {
    throw std::domain_error("population smaller than the required sample size " + std::to_string(report.sample_size));
  }
  report.trials = trials;
  report.diam_v = diam(metric, population);
  report.dist_v = set_dist(metric, population, centers);
  report.eta_v = power(report.dist_v, params.z);
  const auto side = population_side(metric, population, centers, params, report.diam_v, report.dist_v);
  report.bound = side.bound;

  std::vector<PointId> sample(report.sample_size);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, {kTrialStream, trial}));
    for (auto& u : sample) u = population[uniform_index(rng, population.size())];
    const auto stats = sample_side(metric, side, population.size(), sample, centers, params);
    if (stats.violated) ++report.violations;
    if (side.bound > 0.0) report.max_ratio = std::max(report.max_ratio, stats.max_deviation / side.bound);
  }
  report.violation_fraction = static_cast<double>(report.violations) / static_cast<double>(trials);
  report.tolerance = params.lambda_prime +
                     3.0 * std::sqrt(params.lambda_prime * (1.0 - params.lambda_prime) / static_cast<double>(trials));
  return report;
}

}  // namespace oclust
