#include "spmds/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

#include "spmds/csv.hpp"
#include "spmds/errors.hpp"

namespace spmds {

namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Accepts [1, 2, 3] or "1-3,5".
std::vector<int> parse_nodes(const json& item) {
  std::vector<int> nodes;
  if (item.is_array()) {
    for (const auto& node : item) nodes.push_back(node.get<int>());
    return nodes;
  }
  const auto text = item.get<std::string>();
  std::stringstream parts(text);
  std::string part;
  while (std::getline(parts, part, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        nodes.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dash));
        const int hi = std::stoi(part.substr(dash + 1));
        if (hi < lo) throw ValidationError("node range '" + part + "' runs backwards");
        for (int node = lo; node <= hi; ++node) nodes.push_back(node);
      }
    } catch (const std::logic_error&) {
      throw ValidationError("cannot read node list '" + text + "'");
    }
  }
  return nodes;
}

std::vector<double> number_or_list(const json& item) {
  if (item.is_array()) return item.get<std::vector<double>>();
  return {item.get<double>()};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path path(value);
  return path.is_absolute() ? path : base / path;
}

// Top 53 bits of a 64-bit Mersenne Twister draw mapped to [0, 1); the engine
// output is fully specified, so the fleet is reproducible across platforms.
double unit_draw(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace

int parse_clock(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ValidationError("clock '" + std::string(text) + "' is not HH:MM");
  int hours = 0;
  int minutes = 0;
  try {
    hours = std::stoi(std::string(text.substr(0, colon)));
    minutes = std::stoi(std::string(text.substr(colon + 1)));
  } catch (const std::logic_error&) {
    throw ValidationError("clock '" + std::string(text) + "' is not HH:MM");
  }
  if (hours < 0 || hours > 23 || minutes < 0 || minutes > 59) {
    throw ValidationError("clock '" + std::string(text) + "' is out of range");
  }
  return hours * 60 + minutes;
}

std::string slot_label(const HorizonSpec& horizon, int slot) {
  const int minutes =
      (parse_clock(horizon.start) + static_cast<int>(std::lround(slot * horizon.slot_hours * 60.0))) %
      (24 * 60);
  std::string out(5, '0');
  out[0] = static_cast<char>('0' + minutes / 600);
  out[1] = static_cast<char>('0' + minutes / 60 % 10);
  out[2] = ':';
  out[3] = static_cast<char>('0' + minutes % 60 / 10);
  out[4] = static_cast<char>('0' + minutes % 10);
  return out;
}

ScenarioConfig parse_scenario(std::string_view document, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  ScenarioConfig config;
  try {
    config.name = doc.value("name", std::string("scenario"));
    config.feeder = resolve(base_dir, doc.at("feeder").get<std::string>());
    config.baseline = resolve(base_dir, doc.at("baseline").get<std::string>());
    config.power_factor = doc.value("power_factor", config.power_factor);
    config.voltage_floor = doc.value("voltage_floor", config.voltage_floor);

    if (doc.contains("horizon")) {
      const auto& h = doc.at("horizon");
      config.horizon.start = h.value("start", config.horizon.start);
      config.horizon.end = h.value("end", config.horizon.end);
      config.horizon.slots = h.value("slots", config.horizon.slots);
      config.horizon.slot_hours = h.value("slot_minutes", config.horizon.slot_hours * 60.0) / 60.0;
    }
    if (doc.contains("fleet")) {
      const auto& f = doc.at("fleet");
      auto& fleet = config.fleet;
      fleet.max_power_kw = f.value("max_power_kw", fleet.max_power_kw);
      fleet.efficiency = f.value("efficiency", fleet.efficiency);
      fleet.battery_kwh = f.value("battery_kwh", fleet.battery_kwh);
      fleet.seed = f.value("seed", fleet.seed);
      if (f.contains("soc_need")) {
        const auto bounds = f.at("soc_need").get<std::vector<double>>();
        if (bounds.size() != 2) throw ValidationError("fleet.soc_need needs [min, max]");
        fleet.soc_need_min = bounds[0];
        fleet.soc_need_max = bounds[1];
      }
      if (f.contains("per_node")) fleet.per_node = f.at("per_node").get<std::vector<int>>();
    }
    if (doc.contains("grouping")) {
      const auto& g = doc.at("grouping");
      auto& grouping = config.grouping;
      grouping.automatic = g.value("mode", std::string("explicit")) == "auto";
      grouping.dimension_reduction = g.value("dimension_reduction", 0);
      if (grouping.automatic) {
        grouping.groups = g.value("groups", 1);
      } else if (g.contains("groups")) {
        for (const auto& item : g.at("groups")) {
          grouping.explicit_groups.push_back(
              {parse_nodes(item.at("members")), parse_nodes(item.at("subset"))});
        }
        grouping.groups = static_cast<int>(grouping.explicit_groups.size());
      }
    }
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      auto& solver = config.solver;
      const auto algorithm = s.value("algorithm", std::string("spmds"));
      if (algorithm != "spmds" && algorithm != "spds") {
        throw ValidationError("solver.algorithm must be spmds or spds");
      }
      config.algorithm = algorithm == "spds" ? Algorithm::kSpds : Algorithm::kSpmds;
      solver.primal_step = s.value("alpha", 0.0);
      solver.dual_steps = s.contains("beta") ? number_or_list(s.at("beta")) : std::vector<double>{};
      solver.primal_shrink = s.value("tau_u", 1.0);
      solver.dual_shrinks =
          s.contains("tau_lambda") ? number_or_list(s.at("tau_lambda")) : std::vector<double>{1.0};
      solver.tolerance = s.value("tolerance", solver.tolerance);
      solver.max_iterations = s.value("max_iterations", solver.max_iterations);
      solver.dual_cap = s.value("dual_cap", solver.dual_cap);
      solver.threads = s.value("threads", solver.threads);
      const auto order = s.value("dual_order", std::string("jacobi"));
      if (order != "jacobi" && order != "gauss_seidel") {
        throw ValidationError("solver.dual_order must be jacobi or gauss_seidel");
      }
      solver.dual_order = order == "jacobi" ? DualOrder::kJacobi : DualOrder::kGaussSeidel;
      const auto scope = s.value("dual_scope", std::string("group"));
      if (scope != "group" && scope != "fleet") {
        throw ValidationError("solver.dual_scope must be group or fleet");
      }
      solver.dual_scope = scope == "group" ? DualScope::kGroupMembers : DualScope::kWholeFleet;
      const auto kernels = s.value("kernels", std::string("structured"));
      if (kernels != "structured" && kernels != "dense") {
        throw ValidationError("solver.kernels must be structured or dense");
      }
      solver.kernels = kernels == "dense" ? KernelMode::kDense : KernelMode::kStructured;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scenario: ") + e.what());
  }
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path, "scenario"), path.parent_path());
}

std::vector<std::string> validate_scenario(const ScenarioConfig& config,
                                           std::optional<int> node_count) {
  std::vector<std::string> problems;
  const auto& h = config.horizon;
  if (h.slots < 1) problems.emplace_back("horizon.slots must be at least 1");
  if (!(h.slot_hours > 0.0)) problems.emplace_back("horizon.slot_minutes must be positive");
  try {
    int window = parse_clock(h.end) - parse_clock(h.start);
    if (window <= 0) window += 24 * 60;
    if (h.slots >= 1 && std::abs(h.slots * h.slot_hours * 60.0 - window) > 1e-6) {
      problems.push_back("horizon of " + std::to_string(h.slots) + " slots x " +
                         format_number(h.slot_hours * 60.0) + " min does not span " + h.start +
                         "-" + h.end + " (" + std::to_string(window) + " min)");
    }
  } catch (const ValidationError& e) {
    problems.emplace_back(e.what());
  }
  if (!(config.voltage_floor > 0.0 && config.voltage_floor < 1.0)) {
    problems.emplace_back("voltage_floor must lie in (0, 1) p.u.");
  }
  if (!(config.power_factor > 0.0 && config.power_factor <= 1.0)) {
    problems.emplace_back("power_factor must lie in (0, 1]");
  }

  const auto& f = config.fleet;
  if (!(f.max_power_kw > 0.0)) problems.emplace_back("fleet.max_power_kw must be positive");
  if (!(f.efficiency > 0.0 && f.efficiency <= 1.0)) problems.emplace_back("fleet.efficiency must lie in (0, 1]");
  if (!(f.battery_kwh > 0.0)) problems.emplace_back("fleet.battery_kwh must be positive");
  if (!(f.soc_need_min >= 0.0 && f.soc_need_min <= f.soc_need_max && f.soc_need_max <= 1.0)) {
    problems.emplace_back("fleet.soc_need must satisfy 0 <= min <= max <= 1");
  }
  for (int count : f.per_node) {
    if (count < 0) {
      problems.emplace_back("fleet.per_node counts must be nonnegative");
      break;
    }
  }
  if (node_count && !f.per_node.empty() && static_cast<int>(f.per_node.size()) != *node_count) {
    problems.push_back("fleet.per_node lists " + std::to_string(f.per_node.size()) +
                       " nodes, feeder has " + std::to_string(*node_count));
  }

  const auto& g = config.grouping;
  int groups = config.algorithm == Algorithm::kSpds ? 1 : g.groups;
  if (config.algorithm == Algorithm::kSpmds) {
    if (!g.automatic && g.explicit_groups.empty()) {
      problems.emplace_back("grouping needs explicit groups or mode \"auto\"");
    }
    if (groups < 1) {
      problems.emplace_back("grouping needs at least one group");
      groups = 1;
    }
    if (g.dimension_reduction < 0) problems.emplace_back("dimension_reduction must be nonnegative");
    if (node_count) {
      const int bound = max_dimension_reduction(*node_count, groups);
      if (g.dimension_reduction > bound) {
        problems.push_back("dimension_reduction d=" + std::to_string(g.dimension_reduction) +
                           " exceeds the bound n(1-1/r) = " + std::to_string(bound) + " for n=" +
                           std::to_string(*node_count) + ", r=" + std::to_string(groups));
      }
    }
  }
  try {
    config.solver.validate(groups);
  } catch (const ValidationError& e) {
    for (const auto& problem : e.problems()) problems.push_back("solver: " + problem);
  }
  return problems;
}

std::vector<double> load_baseline(const std::filesystem::path& path) {
  std::stringstream in(read_text(path, "baseline"));
  std::string line;
  int column = -1;
  std::vector<double> watts;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (column < 0) {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        if (fields[k] == "kw") column = static_cast<int>(k);
      }
      if (column < 0) throw ValidationError("baseline " + path.string() + " has no kw column");
      continue;
    }
    if (static_cast<int>(fields.size()) <= column) {
      throw ValidationError("baseline row '" + line + "' is short");
    }
    try {
      watts.push_back(std::stod(fields[column]) * 1000.0);
    } catch (const std::logic_error&) {
      throw ValidationError("baseline value '" + fields[column] + "' is not a number");
    }
  }
  return watts;
}

std::vector<EvSpec> generate_fleet(const FleetSpec& spec, std::span<const int> per_node,
                                   double slot_hours) {
  std::mt19937_64 engine(spec.seed);
  std::vector<EvSpec> evs;
  for (std::size_t k = 0; k < per_node.size(); ++k) {
    for (int c = 0; c < per_node[k]; ++c) {
      const double need =
          spec.soc_need_min + (spec.soc_need_max - spec.soc_need_min) * unit_draw(engine);
      EvSpec ev;
      ev.node = static_cast<int>(k) + 1;
      ev.max_power = spec.max_power_kw * 1000.0;
      ev.efficiency = spec.efficiency;
      ev.initial_energy = -need * spec.battery_kwh * 1000.0;
      ev.slot_hours = slot_hours;
      evs.push_back(ev);
    }
  }
  return evs;
}

Scenario assemble(const ScenarioConfig& config) {
  auto feeder = load_feeder(config.feeder);
  if (auto problems = validate_scenario(config, feeder.node_count()); !problems.empty()) {
    throw ValidationError(std::move(problems));
  }
  const auto baseline = load_baseline(config.baseline);
  if (static_cast<int>(baseline.size()) != config.horizon.slots) {
    throw ValidationError("baseline has " + std::to_string(baseline.size()) +
                          " slots, horizon expects " + std::to_string(config.horizon.slots));
  }
  auto loads = make_horizon_load(feeder, baseline, config.power_factor);

  std::vector<int> per_node = config.fleet.per_node;
  if (per_node.empty()) {
    for (const auto& node : feeder.nodes()) per_node.push_back(node.ev_count);
  }
  auto fleet = build_aggregation(feeder, generate_fleet(config.fleet, per_node,
                                                        config.horizon.slot_hours));

  ReductionPlan plan;
  const auto ev_nodes = fleet.ev_nodes();
  if (config.algorithm == Algorithm::kSpds) {
    plan = full_dimension_plan(feeder.node_count(), ev_nodes);
  } else if (config.grouping.automatic) {
    plan = propose_grouping(commonly_reduced(feeder.resistance()),
                            peak_preserved(feeder.resistance()), config.grouping.groups,
                            config.grouping.dimension_reduction, ev_nodes);
  } else {
    plan.dimension_reduction = config.grouping.dimension_reduction;
    plan.groups = config.grouping.explicit_groups;
  }
  auto problem = make_problem(feeder, std::move(loads), std::move(fleet), std::move(plan),
                              config.voltage_floor);
  return Scenario{config, std::move(feeder), std::move(problem)};
}

RunReport run_scenario(const Scenario& scenario) {
  RunReport report = scenario.config.algorithm == Algorithm::kSpds
                         ? spds_run(scenario.problem, scenario.config.solver)
                         : spmds_run(scenario.problem, scenario.config.solver);
  report.seed = scenario.config.fleet.seed;
  return report;
}

RunReport run_scenario(const std::filesystem::path& config_path) {
  return run_scenario(assemble(load_scenario(config_path)));
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string join_counts(const std::vector<std::uint64_t>& counts) {
  std::string out;
  for (auto count : counts) {
    if (!out.empty()) out += ';';
    out += std::to_string(count);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> header_fields(const RunReport& report) {
  const auto& f = report.flops;
  const auto& ops = report.counters;
  return {
      {"algorithm", report.algorithm},
      {"termination", std::string(to_string(report.termination))},
      {"iterations", std::to_string(report.iterations)},
      {"slots", std::to_string(report.slots)},
      {"seed", std::to_string(report.seed)},
      {"flops_n", std::to_string(f.n)},
      {"flops_d", std::to_string(f.d)},
      {"flops_K", std::to_string(f.slots)},
      {"flops_v", std::to_string(f.evs)},
      {"flops_v_m", std::to_string(f.largest_group)},
      {"flops_primal_saved", std::to_string(f.primal.saved)},
      {"flops_primal_ratio", std::to_string(f.primal.ratio.numerator) + "/" +
                                 std::to_string(f.primal.ratio.denominator)},
      {"flops_primal_percent", f.primal.ratio.percent()},
      {"flops_dual_saved", std::to_string(f.dual.saved)},
      {"flops_dual_ratio", std::to_string(f.dual.ratio.numerator) + "/" +
                               std::to_string(f.dual.ratio.denominator)},
      {"flops_dual_percent", f.dual.ratio.percent()},
      {"flops_dual_negative", f.dual.negative ? "1" : "0"},
      {"ops_iterations", std::to_string(ops.iterations)},
      {"ops_evs", std::to_string(ops.evs)},
      {"ops_primal", std::to_string(ops.primal)},
      {"ops_dual", join_counts(ops.dual)},
      {"ops_weighting", std::to_string(ops.weighting)},
  };
}

Ratio parse_ratio(const std::string& text) {
  const auto slash = text.find('/');
  return {std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1))};
}

}  // namespace

void write_report(const std::filesystem::path& dir, const RunReport& report,
                  const Scenario& scenario) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto& horizon = scenario.config.horizon;
  const int n = scenario.problem.node_count();

  std::ostringstream trace;
  for (const auto& [key, value] : header_fields(report)) trace << "# " << key << ',' << value << '\n';
  trace << "iteration,epsilon,objective,min_voltage_pu\n";
  for (std::size_t k = 0; k < report.trace.epsilon.size(); ++k) {
    trace << k + 1 << ',' << format_number(report.trace.epsilon[k]) << ','
          << format_number(report.trace.objective[k]) << ','
          << format_number(report.trace.min_voltage[k]) << '\n';
  }
  write_file(dir / "trace.csv", trace.str());

  std::ostringstream load;
  load << "slot,time,baseline_kw,ev_kw,total_kw\n";
  for (int t = 0; t < report.slots; ++t) {
    const double base = report.baseline_power[t] / 1000.0;
    const double total = report.total_load[t] / 1000.0;
    load << t << ',' << slot_label(horizon, t) << ',' << format_number(base) << ','
         << format_number(total - base) << ',' << format_number(total) << '\n';
  }
  write_file(dir / "load.csv", load.str());

  const auto voltage_table = [&](const Matrix& pu) {
    std::ostringstream out;
    out << "slot,time";
    for (int j = 1; j <= n; ++j) out << ",node_" << j;
    out << '\n';
    for (int t = 0; t < report.slots; ++t) {
      out << t << ',' << slot_label(horizon, t);
      for (int j = 0; j < n; ++j) out << ',' << format_number(pu(j, t));
      out << '\n';
    }
    return out.str();
  };
  write_file(dir / "voltage.csv", voltage_table(report.voltage_pu));
  const Matrix baseline_pu = scenario.problem.loads.compensated_voltage().array().max(0.0).sqrt() /
                             scenario.problem.slack_voltage;
  write_file(dir / "baseline_voltage.csv", voltage_table(baseline_pu));

  std::ostringstream charging;
  charging << "ev,node,group";
  for (int t = 0; t < report.slots; ++t) charging << ",u_" << t;
  charging << '\n';
  const auto& fleet = scenario.problem.fleet;
  for (Eigen::Index i = 0; i < report.profiles.rows(); ++i) {
    const int ev = static_cast<int>(i);
    const int group = report.algorithm == "spds" ? 1 : fleet.group_of(ev) + 1;
    charging << i << ',' << fleet.ev(ev).node << ',' << group;
    for (Eigen::Index t = 0; t < report.profiles.cols(); ++t) {
      charging << ',' << format_number(report.profiles(i, t));
    }
    charging << '\n';
  }
  write_file(dir / "charging.csv", charging.str());

  std::ostringstream summary;
  summary << "scenario: " << scenario.config.name << '\n'
          << "algorithm: " << report.algorithm << '\n'
          << "termination: " << to_string(report.termination) << '\n';
  if (!report.detail.empty()) summary << "detail: " << report.detail << '\n';
  summary << "iterations: " << report.iterations << '\n'
          << "evs: " << report.profiles.rows() << '\n'
          << "groups: " << scenario.problem.group_count() << '\n'
          << "dimension_reduction: " << scenario.problem.plan.dimension_reduction << '\n'
          << "objective: " << format_number(report.objective) << '\n'
          << "min_voltage_pu: " << format_fixed(report.voltage_pu.minCoeff(), 5) << '\n'
          << "flops_primal_saved: " << report.flops.primal.saved << " ("
          << report.flops.primal.ratio.percent() << "%)\n"
          << "flops_dual_saved: " << report.flops.dual.saved << " ("
          << report.flops.dual.ratio.percent() << "%)"
          << (report.flops.dual.negative ? " [negative: degenerate inputs]" : "") << '\n'
          << "seed: " << report.seed << '\n';
  write_file(dir / "summary.txt", summary.str());
}

RunReport load_report(const std::filesystem::path& dir) {
  RunReport report;
  std::map<std::string, std::string> header;
  {
    std::stringstream in(read_text(dir / "trace.csv", "trace"));
    std::string line;
    bool columns = false;
    while (std::getline(in, line)) {
      if (line.rfind("# ", 0) == 0) {
        const auto comma = line.find(',');
        header[line.substr(2, comma - 2)] = line.substr(comma + 1);
        continue;
      }
      if (!columns) {
        columns = true;
        continue;
      }
      const auto fields = split_csv_line(line);
      if (fields.size() < 4) continue;
      report.trace.epsilon.push_back(std::stod(fields[1]));
      report.trace.objective.push_back(std::stod(fields[2]));
      report.trace.min_voltage.push_back(std::stod(fields[3]));
    }
  }
  try {
    report.algorithm = header.at("algorithm");
    const auto termination = header.at("termination");
    report.termination = termination == "converged"  ? Termination::kConverged
                         : termination == "diverged" ? Termination::kDiverged
                                                     : Termination::kMaxIterations;
    report.iterations = std::stoi(header.at("iterations"));
    report.slots = std::stoi(header.at("slots"));
    report.seed = std::stoull(header.at("seed"));
    auto& f = report.flops;
    f.n = std::stoi(header.at("flops_n"));
    f.d = std::stoi(header.at("flops_d"));
    f.slots = std::stoi(header.at("flops_K"));
    f.evs = std::stoi(header.at("flops_v"));
    f.largest_group = std::stoi(header.at("flops_v_m"));
    f.primal.saved = std::stoll(header.at("flops_primal_saved"));
    f.primal.ratio = parse_ratio(header.at("flops_primal_ratio"));
    f.dual.saved = std::stoll(header.at("flops_dual_saved"));
    f.dual.ratio = parse_ratio(header.at("flops_dual_ratio"));
    f.dual.negative = header.at("flops_dual_negative") == "1";
    auto& ops = report.counters;
    ops.iterations = std::stoi(header.at("ops_iterations"));
    ops.evs = std::stoi(header.at("ops_evs"));
    ops.primal = std::stoull(header.at("ops_primal"));
    ops.weighting = std::stoull(header.at("ops_weighting"));
    for (const auto& part : split_csv_line(header.at("ops_dual"))) {
      std::stringstream parts(part);
      std::string item;
      while (std::getline(parts, item, ';')) ops.dual.push_back(std::stoull(item));
    }
  } catch (const std::exception& e) {
    throw ValidationError("trace.csv in " + dir.string() + " has a malformed header: " + e.what());
  }

  {
    std::stringstream in(read_text(dir / "load.csv", "load table"));
    std::string line;
    std::getline(in, line);
    std::vector<double> base;
    std::vector<double> total;
    while (std::getline(in, line)) {
      const auto fields = split_csv_line(line);
      if (fields.size() < 5) continue;
      base.push_back(std::stod(fields[2]) * 1000.0);
      total.push_back(std::stod(fields[4]) * 1000.0);
    }
    report.baseline_power = Eigen::Map<Vector>(base.data(), static_cast<Eigen::Index>(base.size()));
    report.total_load = Eigen::Map<Vector>(total.data(), static_cast<Eigen::Index>(total.size()));
    report.objective = 0.5 * report.total_load.squaredNorm();
  }
  {
    std::stringstream in(read_text(dir / "voltage.csv", "voltage table"));
    std::string line;
    std::getline(in, line);
    const auto nodes = static_cast<Eigen::Index>(split_csv_line(line).size()) - 2;
    std::vector<std::vector<double>> columns;
    while (std::getline(in, line)) {
      const auto fields = split_csv_line(line);
      if (static_cast<Eigen::Index>(fields.size()) < nodes + 2) continue;
      std::vector<double> column;
      for (Eigen::Index j = 0; j < nodes; ++j) column.push_back(std::stod(fields[j + 2]));
      columns.push_back(std::move(column));
    }
    report.voltage_pu.resize(nodes, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t t = 0; t < columns.size(); ++t) {
      for (Eigen::Index j = 0; j < nodes; ++j) {
        report.voltage_pu(j, static_cast<Eigen::Index>(t)) = columns[t][j];
      }
    }
  }
  return report;
}

RunComparison compare_runs(const RunReport& a, const RunReport& b) {
  if (a.slots != b.slots || a.total_load.size() != b.total_load.size()) {
    throw ValidationError("runs cover different horizons (" + std::to_string(a.slots) + " vs " +
                          std::to_string(b.slots) + " slots)");
  }
  RunComparison out;
  out.objective_a = a.objective;
  out.objective_b = b.objective;
  out.objective_delta = b.objective - a.objective;
  out.objective_relative = a.objective != 0.0 ? out.objective_delta / std::abs(a.objective) : 0.0;
  out.load_delta = b.total_load - a.total_load;
  out.max_load_delta = out.load_delta.size() > 0 ? out.load_delta.cwiseAbs().maxCoeff() : 0.0;
  out.min_voltage_a = a.voltage_pu.size() > 0 ? a.voltage_pu.minCoeff() : 0.0;
  out.min_voltage_b = b.voltage_pu.size() > 0 ? b.voltage_pu.minCoeff() : 0.0;
  out.min_voltage_delta = out.min_voltage_b - out.min_voltage_a;
  out.savings = compare_counters(a, b);
  return out;
}

}  // namespace spmds
