#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "spmds/accounting.hpp"
#include "spmds/csv.hpp"
#include "spmds/errors.hpp"
#include "spmds/reduction.hpp"
#include "spmds/scenario.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIo = 3;

struct Overrides {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> tau;
  std::optional<double> tolerance;
  std::optional<int> max_iterations;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> voltage_floor;
  std::optional<int> dimension_reduction;
  std::optional<int> auto_groups;
  std::string algorithm;
  std::string kernels;
  std::string dual_order;
  std::string dual_scope;
};

void add_overrides(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--alpha", o.alpha, "Primal step size");
  cmd.add_option("--beta", o.beta, "Dual step size for every group");
  cmd.add_option("--tau", o.tau, "Shrink factor for the primal and every dual");
  cmd.add_option("--tolerance", o.tolerance, "Convergence tolerance on ||U_new - U_old||");
  cmd.add_option("--max-iterations", o.max_iterations, "Iteration cap");
  cmd.add_option("--threads", o.threads, "Worker threads for the EV updates (0 = all cores)");
  cmd.add_option("--seed", o.seed, "Fleet seed");
  cmd.add_option("--voltage-floor", o.voltage_floor, "Lower voltage bound in p.u.");
  cmd.add_option("--dimension-reduction,-d", o.dimension_reduction, "Rows dropped per group");
  cmd.add_option("--auto-groups", o.auto_groups, "Propose r groups from the feeder matrices");
  cmd.add_option("--algorithm", o.algorithm, "spmds or spds")
      ->check(CLI::IsMember({"spmds", "spds"}));
  cmd.add_option("--kernels", o.kernels, "structured or dense")
      ->check(CLI::IsMember({"structured", "dense"}));
  cmd.add_option("--dual-order", o.dual_order, "jacobi or gauss_seidel")
      ->check(CLI::IsMember({"jacobi", "gauss_seidel"}));
  cmd.add_option("--dual-scope", o.dual_scope, "group or fleet")
      ->check(CLI::IsMember({"group", "fleet"}));
}

void apply(const Overrides& o, spmds::ScenarioConfig& config) {
  auto& solver = config.solver;
  if (o.alpha) solver.primal_step = *o.alpha;
  if (o.beta) solver.dual_steps = {*o.beta};
  if (o.tau) {
    solver.primal_shrink = *o.tau;
    solver.dual_shrinks = {*o.tau};
  }
  if (o.tolerance) solver.tolerance = *o.tolerance;
  if (o.max_iterations) solver.max_iterations = *o.max_iterations;
  if (o.threads) solver.threads = *o.threads;
  if (o.seed) config.fleet.seed = *o.seed;
  if (o.voltage_floor) config.voltage_floor = *o.voltage_floor;
  if (o.dimension_reduction) config.grouping.dimension_reduction = *o.dimension_reduction;
  if (o.auto_groups) {
    config.grouping.automatic = true;
    config.grouping.groups = *o.auto_groups;
    config.grouping.explicit_groups.clear();
  }
  if (!o.algorithm.empty()) {
    config.algorithm = o.algorithm == "spds" ? spmds::Algorithm::kSpds : spmds::Algorithm::kSpmds;
  }
  if (!o.kernels.empty()) {
    solver.kernels = o.kernels == "dense" ? spmds::KernelMode::kDense : spmds::KernelMode::kStructured;
  }
  if (!o.dual_order.empty()) {
    solver.dual_order =
        o.dual_order == "jacobi" ? spmds::DualOrder::kJacobi : spmds::DualOrder::kGaussSeidel;
  }
  if (!o.dual_scope.empty()) {
    solver.dual_scope =
        o.dual_scope == "group" ? spmds::DualScope::kGroupMembers : spmds::DualScope::kWholeFleet;
  }
}

void print_flops(const spmds::FlopsReport& f) {
  std::cout << "n=" << f.n << " d=" << f.d << " K=" << f.slots << " v=" << f.evs
            << " v_m=" << f.largest_group << '\n'
            << "primal saved per EV: " << f.primal.saved << " (" << f.primal.ratio.percent()
            << "%)\n"
            << "dual saved per round: " << f.dual.saved << " (" << f.dual.ratio.percent() << "%)";
  if (f.dual.negative) std::cout << "  warning: negative for these inputs";
  std::cout << '\n';
}

int cmd_run(const std::string& path, const Overrides& o, const std::string& out_dir, bool quiet) {
  auto config = spmds::load_scenario(path);
  apply(o, config);
  const auto scenario = spmds::assemble(config);
  const auto report = spmds::run_scenario(scenario);
  if (!out_dir.empty()) spmds::write_report(out_dir, report, scenario);
  if (!quiet) {
    std::cout << report.algorithm << ": " << spmds::to_string(report.termination) << " after "
              << report.iterations << " iterations\n"
              << "objective " << spmds::format_number(report.objective) << ", min voltage "
              << spmds::format_fixed(report.voltage_pu.minCoeff(), 5) << " p.u.\n";
    print_flops(report.flops);
  }
  if (report.termination == spmds::Termination::kDiverged) {
    std::cerr << "diverged: " << report.detail << '\n';
    return kExitDivergence;
  }
  return 0;
}

int cmd_reduce(const std::string& feeder_path, const std::string& out_dir, int groups, int d) {
  const auto feeder = spmds::load_feeder(feeder_path);
  const auto all = spmds::commonly_reduced(feeder.resistance());
  const auto col = spmds::peak_preserved(feeder.resistance());
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw spmds::IoError("cannot create " + out_dir);
    const auto save = [&](const char* name, auto&& writer) {
      std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
      if (!out) throw spmds::IoError(std::string("cannot write ") + name);
      writer(out);
    };
    save("resistance.csv", [&](std::ostream& s) { spmds::write_matrix_csv(s, feeder.resistance()); });
    save("reactance.csv", [&](std::ostream& s) { spmds::write_matrix_csv(s, feeder.reactance()); });
    save("commonly_reduced.csv", [&](std::ostream& s) { spmds::write_heatmap_csv(s, all); });
    save("peak_preserved.csv", [&](std::ostream& s) { spmds::write_heatmap_csv(s, col); });
  }
  const auto peaks = spmds::column_peaks(col);
  std::cout << "column peaks:";
  for (int p : peaks) std::cout << ' ' << p;
  std::cout << '\n';
  if (groups > 0) {
    std::vector<int> ev_nodes;
    for (int k = 0; k < feeder.node_count(); ++k) {
      if (feeder.nodes()[k].ev_count > 0) ev_nodes.push_back(k + 1);
    }
    const auto plan = spmds::propose_grouping(all, col, groups, d, ev_nodes);
    for (int s = 0; s < plan.group_count(); ++s) {
      const auto& g = plan.groups[s];
      std::cout << "group " << s + 1 << ": members";
      for (int m : g.members) std::cout << ' ' << m;
      std::cout << " | subset " << g.voltage_subset.front() << '-' << g.voltage_subset.back()
                << '\n';
    }
  }
  return 0;
}

int cmd_validate(const std::string& path, const Overrides& o) {
  auto config = spmds::load_scenario(path);
  apply(o, config);
  const auto feeder = spmds::load_feeder(config.feeder);
  auto problems = spmds::validate_scenario(config, feeder.node_count());
  if (problems.empty()) {
    try {
      spmds::assemble(config);
    } catch (const spmds::ValidationError& e) {
      problems = e.problems();
    } catch (const spmds::InfeasibleError& e) {
      problems.emplace_back(e.what());
    }
  }
  for (const auto& problem : problems) std::cout << "invalid: " << problem << '\n';
  if (!problems.empty()) return kExitValidation;
  std::cout << "ok\n";
  return 0;
}

int cmd_compare(const std::string& a_dir, const std::string& b_dir) {
  const auto a = spmds::load_report(a_dir);
  const auto b = spmds::load_report(b_dir);
  const auto diff = spmds::compare_runs(a, b);
  std::cout << "objective " << spmds::format_number(diff.objective_a) << " -> "
            << spmds::format_number(diff.objective_b) << " (relative "
            << spmds::format_number(diff.objective_relative) << ")\n"
            << "max per-slot load delta " << spmds::format_number(diff.max_load_delta / 1000.0)
            << " kW\n"
            << "min voltage " << spmds::format_fixed(diff.min_voltage_a, 5) << " -> "
            << spmds::format_fixed(diff.min_voltage_b, 5) << " p.u.\n"
            << "measured primal saving per EV " << spmds::format_number(diff.savings.primal_saved)
            << " (formula " << diff.savings.formula.primal.saved << ")\n"
            << "measured dual saving per round " << spmds::format_number(diff.savings.dual_saved)
            << " (formula " << diff.savings.formula.dual.saved << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized EV charging with network dimension reduction"};
  app.require_subcommand(1);

  Overrides run_overrides;
  std::string run_path;
  std::string run_out;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write its result files");
  run->add_option("scenario", run_path, "Scenario file")->required();
  run->add_option("--out,-o", run_out, "Output directory");
  run->add_flag("--quiet,-q", quiet, "Suppress the summary");
  add_overrides(*run, run_overrides);

  std::string reduce_feeder;
  std::string reduce_out;
  int reduce_groups = 0;
  int reduce_d = 0;
  auto* reduce = app.add_subcommand("reduce", "Emit R, X, commonly-reduced and peak-preserved matrices");
  reduce->add_option("feeder", reduce_feeder, "Feeder file")->required();
  reduce->add_option("--out,-o", reduce_out, "Output directory");
  reduce->add_option("--groups,-r", reduce_groups, "Also propose this many groups");
  reduce->add_option("--dimension-reduction,-d", reduce_d, "Dimension reduction for the proposal");

  int fn = 0, fd = 0, fk = 52, fv = 0, fvm = 0;
  std::string flops_scenario;
  auto* flops = app.add_subcommand("flops", "Closed-form FLOPS savings");
  flops->add_option("--scenario", flops_scenario, "Take n, d, K, v and v_m from a scenario");
  flops->add_option("-n", fn, "Node count");
  flops->add_option("-d", fd, "Dimension reduction");
  flops->add_option("-K", fk, "Time slots");
  flops->add_option("-v", fv, "EV count");
  flops->add_option("--vm", fvm, "Largest group size");

  std::string cmp_a;
  std::string cmp_b;
  auto* compare = app.add_subcommand("compare", "Compare two run output directories");
  compare->add_option("a", cmp_a, "Reference run (full dimension)")->required();
  compare->add_option("b", cmp_b, "Second run")->required();

  Overrides validate_overrides;
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
  validate->add_option("scenario", validate_path, "Scenario file")->required();
  add_overrides(*validate, validate_overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_path, run_overrides, run_out, quiet);
    if (*reduce) return cmd_reduce(reduce_feeder, reduce_out, reduce_groups, reduce_d);
    if (*flops) {
      if (!flops_scenario.empty()) {
        const auto scenario = spmds::assemble(spmds::load_scenario(flops_scenario));
        const auto& p = scenario.problem;
        print_flops(spmds::make_flops_report(p.node_count(), p.plan.dimension_reduction, p.slots(),
                                             p.ev_count(), p.fleet.largest_group()));
      } else {
        print_flops(spmds::make_flops_report(fn, fd, fk, fv, fvm));
      }
      return 0;
    }
    if (*compare) return cmd_compare(cmp_a, cmp_b);
    if (*validate) return cmd_validate(validate_path, validate_overrides);
  } catch (const spmds::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const spmds::ValidationError& e) {
    for (const auto& problem : e.problems()) std::cerr << "invalid: " << problem << '\n';
    return kExitValidation;
  } catch (const spmds::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
