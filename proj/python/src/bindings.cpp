#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spmds/accounting.hpp"
#include "spmds/errors.hpp"
#include "spmds/feeder.hpp"
#include "spmds/fleet.hpp"
#include "spmds/reduction.hpp"
#include "spmds/scenario.hpp"
#include "spmds/solver.hpp"

namespace py = pybind11;
using namespace spmds;

namespace {

std::vector<Line> to_lines(const std::vector<std::tuple<int, int, double, double>>& rows) {
  std::vector<Line> lines;
  for (const auto& [parent, child, r, x] : rows) lines.push_back({parent, child, r, x});
  return lines;
}

ReductionPlan to_plan(int d, const std::vector<std::pair<std::vector<int>, std::vector<int>>>& groups) {
  ReductionPlan plan;
  plan.dimension_reduction = d;
  for (const auto& [members, subset] : groups) plan.groups.push_back({members, subset});
  return plan;
}

py::list plan_groups(const ReductionPlan& plan) {
  py::list out;
  for (const auto& g : plan.groups) out.append(py::make_tuple(g.members, g.voltage_subset));
  return out;
}

py::dict flops_dict(const FlopsReport& r) {
  py::dict out;
  out["primal_saved"] = r.primal.saved;
  out["primal_ratio"] = py::make_tuple(r.primal.ratio.numerator, r.primal.ratio.denominator);
  out["primal_percent"] = r.primal.ratio.percent();
  out["dual_saved"] = r.dual.saved;
  out["dual_ratio"] = py::make_tuple(r.dual.ratio.numerator, r.dual.ratio.denominator);
  out["dual_percent"] = r.dual.ratio.percent();
  out["dual_negative"] = r.dual.negative;
  return out;
}

py::dict report_dict(const RunReport& r) {
  py::dict out;
  out["algorithm"] = r.algorithm;
  out["termination"] = std::string(to_string(r.termination));
  out["detail"] = r.detail;
  out["iterations"] = r.iterations;
  out["objective"] = r.objective;
  out["profiles"] = Matrix(r.profiles);
  out["baseline_power"] = r.baseline_power;
  out["total_load"] = r.total_load;
  out["voltage_pu"] = r.voltage_pu;
  out["epsilon"] = r.trace.epsilon;
  out["objective_trace"] = r.trace.objective;
  out["min_voltage_trace"] = r.trace.min_voltage;
  out["flops"] = flops_dict(r.flops);
  out["seed"] = r.seed;
  return out;
}

}  // namespace

PYBIND11_MODULE(_spmds, m) {
  m.doc() = "Decentralized EV charging with voltage-constraint dimension reduction";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<TopologyError>(m, "TopologyError", error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  m.def("flops", [](int n, int d, int slots, int evs, int largest_group) {
    return flops_dict(make_flops_report(n, d, slots, evs, largest_group));
  }, py::arg("n"), py::arg("d"), py::arg("slots"), py::arg("evs"), py::arg("largest_group"),
        "Closed-form primal and dual FLOPS savings.");

  m.def("graph_matrices", [](int n, const std::vector<std::tuple<int, int, double, double>>& lines) {
    const auto parsed = to_lines(lines);
    return build_graph_matrices(n, parsed);
  }, py::arg("n"), py::arg("lines"),
        "Resistance and reactance path-sum matrices from (parent, child, r, x) lines.");

  m.def("load_feeder", [](const std::filesystem::path& path) {
    const auto feeder = load_feeder(path);
    py::dict out;
    out["name"] = feeder.name();
    out["nodes"] = feeder.node_count();
    out["slack_voltage"] = feeder.slack_voltage();
    out["resistance"] = feeder.resistance();
    out["reactance"] = feeder.reactance();
    return out;
  }, py::arg("path"));

  m.def("commonly_reduced", &commonly_reduced, py::arg("resistance"));
  m.def("peak_preserved", &peak_preserved, py::arg("resistance"));
  m.def("column_peaks", &column_peaks, py::arg("peak_preserved"));
  m.def("max_dimension_reduction", &max_dimension_reduction, py::arg("n"), py::arg("groups"));

  m.def("propose_grouping", [](const Matrix& resistance, int groups, int d, std::vector<int> ev_nodes) {
    const auto plan = propose_grouping(commonly_reduced(resistance), peak_preserved(resistance),
                                       groups, d, ev_nodes);
    return plan_groups(plan);
  }, py::arg("resistance"), py::arg("groups"), py::arg("d"), py::arg("ev_nodes"),
        "List of (members, voltage_subset) pairs.");

  m.def("validate_plan", [](int n, int d, const std::vector<std::pair<std::vector<int>, std::vector<int>>>& groups,
                            std::vector<int> ev_nodes) {
    std::vector<std::string> messages;
    for (auto& v : validate_plan(to_plan(d, groups), n, ev_nodes)) messages.push_back(v.message);
    return messages;
  }, py::arg("n"), py::arg("d"), py::arg("groups"), py::arg("ev_nodes") = std::vector<int>{},
        "Every violated grouping rule; empty when the plan is usable.");

  m.def("project_box_sum", [](const Vector& y, double rate_sum) {
    return project_box_sum(as_span(y), rate_sum);
  }, py::arg("profile"), py::arg("rate_sum"),
        "Euclidean projection onto {0 <= u <= 1, sum(u) = rate_sum}.");

  m.def("validate_scenario", [](const std::filesystem::path& path) {
    return validate_scenario(load_scenario(path));
  }, py::arg("path"));

  m.def("run_scenario", [](const std::filesystem::path& path, const std::optional<std::filesystem::path>& out_dir) {
    const auto scenario = assemble(load_scenario(path));
    RunReport report;
    {
      py::gil_scoped_release release;
      report = run_scenario(scenario);
    }
    if (out_dir) write_report(*out_dir, report, scenario);
    return report_dict(report);
  }, py::arg("path"), py::arg("out_dir") = std::nullopt,
        "Runs a scenario file; optionally writes the report files.");
}
