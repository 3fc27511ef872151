#include "oclust/extensions.hpp"

#include <cmath>
#include <stdexcept>

#include "oclust/cost.hpp"

namespace oclust {

void ColorfulInstance::validate() const {
  problem().validate();
}

OutlierProblem ColorfulInstance::problem(std::shared_ptr<const Matroid> matroid) const {
  std::size_t total = 0;
  for (std::size_t b : budgets) total += b;
  if (total > base.clients.size()) throw std::invalid_argument("color budgets exceed the number of clients");
  if (budgets.empty()) throw std::invalid_argument("at least one color is required");
  OutlierProblem out;
  out.instance = base;
  out.client_colors = colors;
  out.color_budgets = budgets;
  out.matroid = std::move(matroid);
  return out;
}

ReductionReport kz_solve_with_outliers(const MetricInstance& inst, const ReductionOptions& options) {
  if (!(inst.z >= 1.0)) throw std::invalid_argument("z must be >= 1");
  return solve_with_outliers(inst, options);
}

ReductionReport colorful_solve(const ColorfulInstance& inst, const ReductionOptions& options) {
  return solve_problem(inst.problem(), options);
}

ReductionReport matroid_median_solve(const MetricInstance& inst, std::shared_ptr<const Matroid> matroid,
                                     const ReductionOptions& options) {
  if (!matroid) throw std::invalid_argument("null matroid");
  OutlierProblem problem;
  problem.instance = inst;
  problem.matroid = std::move(matroid);
  return solve_problem(problem, options);
}

ReductionReport colorful_matroid_solve(const ColorfulInstance& inst, std::shared_ptr<const Matroid> matroid,
                                       const ReductionOptions& options) {
  if (!matroid) throw std::invalid_argument("null matroid");
  return solve_problem(inst.problem(std::move(matroid)), options);
}

Solution colorful_oracle(const ColorfulInstance& inst, std::uint64_t budget) {
  inst.validate();
  return exact_constrained_outlier_oracle(inst.base, CenterConstraint::cardinality(inst.base.k), inst.colors,
                                          inst.budgets, budget);
}

Solution matroid_oracle(const MetricInstance& inst, std::shared_ptr<const Matroid> matroid, std::uint64_t budget) {
  OutlierProblem problem;
  problem.instance = inst;
  problem.matroid = matroid;
  problem.validate();
  return exact_constrained_outlier_oracle(inst, CenterConstraint::independent_in(std::move(matroid)), {}, {}, budget);
}

Solution colorful_matroid_oracle(const ColorfulInstance& inst, std::shared_ptr<const Matroid> matroid,
                                 std::uint64_t budget) {
  inst.problem(matroid).validate();
  return exact_constrained_outlier_oracle(inst.base, CenterConstraint::independent_in(std::move(matroid)), inst.colors,
                                          inst.budgets, budget);
}

bool relaxed_triangle_holds(const DistanceOracle& metric, PointId p, PointId q, PointId r, double z,
                            double relative_tolerance) {
  const double lhs = power(metric.distance(p, q), z);
  const double rhs = std::pow(2.0, z - 1.0) * (power(metric.distance(p, r), z) + power(metric.distance(r, q), z));
  return lhs <= rhs * (1.0 + relative_tolerance);
}

}  // namespace oclust
