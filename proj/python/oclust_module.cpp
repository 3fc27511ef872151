#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oclust/bench.hpp"
#include "oclust/coreset.hpp"
#include "oclust/extensions.hpp"
#include "oclust/io.hpp"
#include "oclust/matroid.hpp"
#include "oclust/metric.hpp"
#include "oclust/reduction.hpp"
#include "oclust/solvers.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace oclust;

namespace {

// Python objects cross the boundary as JSON text.
json to_cpp(const py::handle& obj) {
  if (obj.is_none()) return json::object();
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<PointId> ids(const std::vector<std::uint32_t>& raw) {
  std::vector<PointId> out;
  out.reserve(raw.size());
  for (auto i : raw) out.push_back(point_id(i));
  return out;
}

std::vector<std::uint32_t> raw_ids(const std::vector<PointId>& points) {
  std::vector<std::uint32_t> out;
  out.reserve(points.size());
  for (auto p : points) out.push_back(index_of(p));
  return out;
}

MetricInstance make_instance(std::shared_ptr<const DistanceOracle> metric, const std::vector<std::uint32_t>& clients,
                             const std::vector<std::uint32_t>& facilities, std::size_t k, std::size_t m, double z) {
  MetricInstance inst;
  inst.metric = std::move(metric);
  inst.clients = ids(clients);
  inst.facilities = ids(facilities);
  inst.k = k;
  inst.m = m;
  inst.z = z;
  inst.validate();
  return inst;
}

MetricInstance euclidean(const std::vector<std::vector<double>>& points, const std::vector<std::uint32_t>& clients,
                         const std::vector<std::uint32_t>& facilities, std::size_t k, std::size_t m, double z) {
  if (points.empty()) throw std::invalid_argument("no points");
  const std::size_t dimension = points.front().size();
  std::vector<double> coordinates;
  for (const auto& p : points) {
    if (p.size() != dimension) throw std::invalid_argument("points have different dimensions");
    coordinates.insert(coordinates.end(), p.begin(), p.end());
  }
  return make_instance(std::make_shared<EuclideanDistance>(dimension, std::move(coordinates)), clients, facilities, k,
                       m, z);
}

MetricInstance from_matrix(const std::vector<std::vector<double>>& matrix, const std::vector<std::uint32_t>& clients,
                           const std::vector<std::uint32_t>& facilities, std::size_t k, std::size_t m, double z) {
  const std::size_t n = matrix.size();
  std::vector<double> full;
  full.reserve(n * n);
  for (const auto& row : matrix) {
    if (row.size() != n) throw std::invalid_argument("distance matrix is not square");
    full.insert(full.end(), row.begin(), row.end());
  }
  return make_instance(std::make_shared<MatrixDistance>(n, std::move(full)), clients, facilities, k, m, z);
}

OutlierProblem make_problem(const MetricInstance& inst, const std::optional<std::vector<std::uint32_t>>& colors,
                            const std::optional<std::vector<std::size_t>>& budgets,
                            const std::optional<std::string>& matroid) {
  OutlierProblem problem;
  problem.instance = inst;
  if (colors.has_value() != budgets.has_value()) throw std::invalid_argument("colors and budgets go together");
  if (colors) {
    problem.client_colors = *colors;
    problem.color_budgets = *budgets;
  }
  if (matroid) problem.matroid = parse_matroid(*matroid);
  problem.validate();
  return problem;
}

ReductionOptions resolve_options(const OutlierProblem& problem, const py::object& params, std::uint64_t seed) {
  const json j = to_cpp(params);
  ParamsSpec defaults;
  defaults.s_factor = 8.0;
  ParamsSpec spec = params_from_json(j, defaults);
  const auto& inst = problem.instance;
  ReductionOptions options = spec.resolve(inst.clients.size(), inst.k, inst.m);
  options.seed = seed;
  options.solver.seed = seed;
  return options;
}

py::dict solution_dict(const Solution& s) {
  py::dict d;
  d["centers"] = raw_ids(s.centers);
  d["outliers"] = raw_ids(s.outliers);
  d["cost"] = s.cost;
  return d;
}

}  // namespace

PYBIND11_MODULE(oclust, m) {
  m.doc() = "Clustering with outliers: coreset enumeration over exact and local-search solvers";

  py::register_exception<BudgetExceeded>(m, "BudgetExceeded");
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<MetricInstance>(m, "Instance")
      .def_static("euclidean", &euclidean, py::arg("points"), py::arg("clients"), py::arg("facilities"),
                  py::arg("k"), py::arg("m") = 0, py::arg("z") = 1.0,
                  "Points in R^d; clients and facilities index into points.")
      .def_static("from_matrix", &from_matrix, py::arg("matrix"), py::arg("clients"), py::arg("facilities"),
                  py::arg("k"), py::arg("m") = 0, py::arg("z") = 1.0)
      .def_static("parse", [](const std::string& text) { return parse_instance(text); })
      .def("to_text", [](const MetricInstance& inst) { return write_instance(inst); })
      .def_property_readonly("clients", [](const MetricInstance& inst) { return raw_ids(inst.clients); })
      .def_property_readonly("facilities", [](const MetricInstance& inst) { return raw_ids(inst.facilities); })
      .def_property_readonly("k", [](const MetricInstance& inst) { return inst.k; })
      .def_property_readonly("m", [](const MetricInstance& inst) { return inst.m; })
      .def_property_readonly("z", [](const MetricInstance& inst) { return inst.z; })
      .def("distance", [](const MetricInstance& inst, std::uint32_t a,
                          std::uint32_t b) { return inst.oracle().distance(point_id(a), point_id(b)); })
      .def("__repr__", [](const MetricInstance& inst) {
        return "<oclust.Instance clients=" + std::to_string(inst.clients.size()) +
               " facilities=" + std::to_string(inst.facilities.size()) + " k=" + std::to_string(inst.k) +
               " m=" + std::to_string(inst.m) + " z=" + format_number(inst.z) + ">";
      });

  m.def(
      "trimmed_cost",
      [](const MetricInstance& inst, const std::vector<std::uint32_t>& centers,
         const std::optional<std::vector<std::uint32_t>>& colors,
         const std::optional<std::vector<std::size_t>>& budgets) {
        const auto problem = make_problem(inst, colors, budgets, std::nullopt);
        const auto c = ids(centers);
        return solution_dict(evaluate_candidate(c, problem));
      },
      py::arg("instance"), py::arg("centers"), py::arg("colors") = py::none(), py::arg("budgets") = py::none(),
      "Outlier-trimmed cost of the centers with the canonical outliers.");

  m.def(
      "solve",
      [](const MetricInstance& inst, const py::object& params, std::uint64_t seed,
         const std::optional<std::vector<std::uint32_t>>& colors,
         const std::optional<std::vector<std::size_t>>& budgets, const std::optional<std::string>& matroid) {
        const auto problem = make_problem(inst, colors, budgets, matroid);
        const auto options = resolve_options(problem, params, seed);
        ReductionReport report;
        {
          py::gil_scoped_release release;
          report = solve_problem(problem, options);
        }
        return to_py(to_json(report));
      },
      py::arg("instance"), py::arg("params") = py::none(), py::arg("seed") = 0, py::arg("colors") = py::none(),
      py::arg("budgets") = py::none(), py::arg("matroid") = py::none(),
      "Runs the reduction. params uses the suite keys (epsilon, s, s_factor, solver, rounds, ...); "
      "colors are 0-based; matroid is matroid file text. Returns the JSON report as a dict.");

  m.def(
      "oracle",
      [](const MetricInstance& inst, const std::optional<std::vector<std::uint32_t>>& colors,
         const std::optional<std::vector<std::size_t>>& budgets, const std::optional<std::string>& matroid,
         std::uint64_t budget) {
        const auto problem = make_problem(inst, colors, budgets, matroid);
        Solution s;
        {
          py::gil_scoped_release release;
          if (problem.colorful()) {
            const ColorfulInstance colorful{inst, problem.client_colors, problem.color_budgets};
            s = problem.matroid ? colorful_matroid_oracle(colorful, problem.matroid, budget)
                                : colorful_oracle(colorful, budget);
          } else {
            s = problem.matroid ? matroid_oracle(inst, problem.matroid, budget) : exact_outlier_oracle(inst, budget);
          }
        }
        return solution_dict(s);
      },
      py::arg("instance"), py::arg("colors") = py::none(), py::arg("budgets") = py::none(),
      py::arg("matroid") = py::none(), py::arg("budget") = kDefaultEnumerationBudget,
      "Brute-force optimum; raises BudgetExceeded past `budget` center sets.");

  m.def(
      "coreset",
      [](const MetricInstance& inst, const py::object& params, std::uint64_t seed, std::size_t round) {
        const auto problem = make_problem(inst, std::nullopt, std::nullopt, std::nullopt);
        const auto options = resolve_options(problem, params, seed);
        const PreparedRings prepared = prepare_rings(problem, options);
        const WeightedCoreset coreset =
            build_coreset(prepared.rings, prepared.sample_size, round_seed(options.seed, round));
        py::dict d;
        d["radius"] = prepared.rings.radius;
        d["phi"] = prepared.rings.phi;
        d["tau"] = prepared.rings.tau;
        d["baseline"] = raw_ids(prepared.rings.baseline);
        d["sample_size"] = prepared.sample_size;
        d["size_bound"] = coreset_size_bound(prepared.sample_size, inst.k, inst.m, prepared.rings.tau,
                                             inst.clients.size());
        py::list entries;
        for (const auto& e : coreset.entries) {
          entries.append(py::make_tuple(index_of(e.point), e.weight, e.ring.center, e.ring.band));
        }
        d["entries"] = entries;
        return d;
      },
      py::arg("instance"), py::arg("params") = py::none(), py::arg("seed") = 0, py::arg("round") = 0,
      "Coreset of one round: entries are (point, weight, baseline center index, band).");

  m.def(
      "generate_planted",
      [](const py::object& config) {
        const PlantedInstance planted = generate_planted(planted_config_from_json(to_cpp(config)));
        py::dict info;
        info["labels"] = planted.labels;
        info["centers"] = planted.centers;
        info["max_spread"] = planted.max_spread;
        return py::make_tuple(planted.instance, info);
      },
      py::arg("config") = py::none(), "Planted Gaussian clusters plus far outliers; returns (instance, info).");

  m.def(
      "run_experiment",
      [](const py::object& suite, const std::string& base_dir) {
        const json j = to_cpp(suite);
        ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(j, std::filesystem::path(base_dir), false);
        }
        return to_py(to_json(report));
      },
      py::arg("suite"), py::arg("base_dir") = ".", "Runs a suite against the exact oracles.");

  m.def("practical_sample_size", &practical_sample_size, py::arg("factor"), py::arg("n"), py::arg("k"),
        py::arg("m"), "ceil(factor (m + k ln n)).");
}
