#pragma once

// Ring-based weighted coreset around a (k+m)-median baseline.
//
// Clients are assigned to their nearest baseline center c_i and split into
// distance bands: band 0 holds d(p, c_i) <= R, band j >= 1 holds
// 2^(j-1) R < d(p, c_i) <= 2^j R, where R = (cost_0(X, A) / (tau n))^(1/z)
// and n = |X|. Rings no larger than the sample size s are copied verbatim;
// larger rings keep |ring| mod s points at weight 1 and draw s points with
// replacement from the rest at weight (|ring| - |ring| mod s) / s.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oclust/matroid.hpp"
#include "oclust/metric.hpp"
#include "oclust/solvers.hpp"

namespace oclust {

enum class SizeMode { theory, practical };

std::string to_string(SizeMode mode);
SizeMode parse_size_mode(const std::string& name);

struct CoresetParams {
  double epsilon = 0.5;
  double lambda = 0.1;
  /// Baseline guarantee. When unset the guarantee reported by the baseline
  /// solver is used.
  std::optional<double> tau;
  double c_theory = 1.0;
  double c_prime = 9.0;
  SizeMode mode = SizeMode::practical;
  std::optional<std::uint64_t> practical_s;
  double z = 1.0;

  void validate() const;

  /// Per-ring sample size s. Theory mode:
  ///   ceil(c tau^2 2^(c' z) / eps^2 * (m + k ln n + ln(1/lambda))),
  /// with the 2^(c' z) factor only for z > 1. Saturates at UINT64_MAX.
  std::uint64_t sample_size(std::size_t n, std::size_t k, std::size_t m, double tau) const;

  /// eps / (8 tau) for z = 1, eps / (2^(9z) tau) otherwise.
  double xi(double tau) const;
  /// n^-k lambda / (4 (k + m) (1 + phi)).
  double lambda_prime(std::size_t n, std::size_t k, std::size_t m, std::size_t phi) const;
  /// (4 / xi^2) (q + ln(2 / lambda')), the per-ring requirement of the sampling bound.
  static double lemma_sample_size(double xi, double lambda_prime, std::size_t q);
};

struct RingKey {
  std::size_t center = 0;
  std::uint32_t color = 0;
  std::size_t band = 0;

  auto operator<=>(const RingKey&) const = default;
};

struct RingPartition {
  std::vector<PointId> baseline;          // A
  double baseline_cost = 0.0;             // cost_0(X, A) with exponent z
  double radius = 0.0;                    // R
  std::size_t phi = 0;                    // max band index
  double tau = 1.0;
  double z = 1.0;
  std::map<RingKey, std::vector<PointId>> rings;
  std::vector<std::size_t> assignment;    // aligned with the client list

  std::size_t client_count() const { return assignment.size(); }
  std::size_t nonempty_rings() const { return rings.size(); }
  std::size_t max_ring_size() const;
};

/// I' = (X, F u X, k + m) with no outliers.
MetricInstance build_augmented_instance(const MetricInstance& inst);

struct BaselineOptions {
  /// Exact enumeration is used when k + m is at most this cap and the number of
  /// center sets fits exact_budget; otherwise single-swap local search.
  std::size_t exact_max_centers = 6;
  std::uint64_t exact_budget = 200'000;
  SolverHandle local_search{SolverKind::local_search};
  /// Forces one solver regardless of size.
  std::optional<SolverKind> force;
};

struct Baseline {
  std::vector<PointId> centers;
  double cost = 0.0;
  /// 1 for exact; (3 + 2)^z for local search (proven for z = 1, used as the
  /// nominal factor otherwise).
  double tau = 1.0;
  bool exact = true;
  bool converged = true;
};

/// Solves the outlier-free augmented instance. `constraint` defaults to
/// cardinality k' = augmented.k.
Baseline baseline_solve(const MetricInstance& augmented, const BaselineOptions& options,
                        const std::optional<CenterConstraint>& constraint = std::nullopt);

/// Rings per (center, color, band). `client_colors` may be empty.
RingPartition ring_partition(const MetricInstance& inst, std::span<const PointId> baseline, double tau,
                             std::span<const std::uint32_t> client_colors = {});

struct RingBoundReport {
  double radius_sum = 0.0;     // sum |X_ij| (2^j R)^z
  double radius_bound = 0.0;   // (1 + 2^z) cost_0(X, A)
  double diameter_sum = 0.0;   // sum |X_ij| diam(X_ij)^z
  double diameter_bound = 0.0; // 2^z (1 + 2^z) cost_0(X, A)
  bool passed = false;
};

RingBoundReport verify_ring_bounds(const RingPartition& rings, const DistanceOracle& metric);

struct CoresetEntry {
  RingKey ring;
  PointId point;
  std::uint64_t weight = 1;

  friend bool operator==(const CoresetEntry&, const CoresetEntry&) = default;
};

struct WeightedCoreset {
  std::vector<CoresetEntry> entries;  // ring order; verbatim points first, then draws
  std::map<RingKey, bool> small;
  std::map<RingKey, std::uint64_t> ring_sizes;
  std::uint64_t sample_size = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
  WeightedPointSet union_set() const;
  WeightedPointSet group(const RingKey& key) const;
};

/// Samples every ring with its own stream derived from `seed` and the ring key.
WeightedCoreset build_coreset(const RingPartition& rings, std::uint64_t sample_size, std::uint64_t seed);

/// 2s (k + m)(1 + ceil(log2(tau n))), times the number of color classes.
std::uint64_t coreset_size_bound(std::uint64_t sample_size, std::size_t k, std::size_t m, double tau, std::size_t n,
                                 std::size_t colors = 1);

/// Parameters of the single-ring sampling bound.
struct LemmaParams {
  double xi = 0.25;
  double lambda_prime = 0.05;
  std::size_t q = 0;
  double z = 1.0;
};

struct LemmaTrialStats {
  double max_deviation = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct LemmaReport {
  std::size_t sample_size = 0;  // s'
  std::size_t trials = 0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  double tolerance = 0.0;       // lambda' + 3 sqrt(lambda' (1 - lambda') / trials)
  double bound = 0.0;           // right-hand side, fixed for (V, C)
  double max_ratio = 0.0;       // largest deviation / bound seen
  double diam_v = 0.0;
  double dist_v = 0.0;          // d(V, C)
  double eta_v = 0.0;           // min_v d(v, C)^z
};

/// Deviation of one sample U (with weight |V| / |U|) from V, maximized over
/// t = 0..q with t' = floor(t |U| / |V|).
LemmaTrialStats lemma_deviation(const DistanceOracle& metric, std::span<const PointId> population,
                                std::span<const PointId> sample, std::span<const PointId> centers,
                                const LemmaParams& params);

/// Monte-Carlo harness for the sampling bound: draws `trials` samples of size
/// s' with replacement and counts violations. Throws std::domain_error when
/// |V| < s'.
LemmaReport sampling_lemma_check(const DistanceOracle& metric, std::span<const PointId> population,
                                 std::span<const PointId> centers, const LemmaParams& params, std::size_t trials,
                                 std::uint64_t seed);

}  // namespace oclust
