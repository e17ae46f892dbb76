#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spmds/feeder.hpp"
#include "spmds/solver.hpp"

namespace spmds {

struct HorizonSpec {
  std::string start = "19:00";
  std::string end = "08:00";
  int slots = 52;
  double slot_hours = 0.25;
};

struct FleetSpec {
  double max_power_kw = 6.6;
  double efficiency = 0.9;
  double soc_need_min = 0.2;  // fraction of battery capacity still to charge
  double soc_need_max = 0.6;
  double battery_kwh = 24.0;
  std::uint64_t seed = 2020;
  /// EVs per node (index k is node k + 1); empty means use the feeder's counts.
  std::vector<int> per_node;
};

struct GroupingSpec {
  bool automatic = false;
  int groups = 1;
  int dimension_reduction = 0;
  std::vector<Group> explicit_groups;
};

enum class Algorithm { kSpmds, kSpds };

struct ScenarioConfig {
  std::string name;
  std::filesystem::path feeder;
  std::filesystem::path baseline;
  HorizonSpec horizon;
  double power_factor = 0.95;
  double voltage_floor = 0.954;
  FleetSpec fleet;
  GroupingSpec grouping;
  Algorithm algorithm = Algorithm::kSpmds;
  SolverConfig solver;
};

/// Parses a scenario document. Relative paths resolve against `base_dir`.
ScenarioConfig parse_scenario(std::string_view document, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Every problem with the configuration; bounds that depend on the feeder are
/// checked only when `node_count` is given.
std::vector<std::string> validate_scenario(const ScenarioConfig& config,
                                           std::optional<int> node_count = std::nullopt);

/// Minutes past midnight for "HH:MM".
int parse_clock(std::string_view text);
/// Wall-clock label of slot t, e.g. "19:15".
std::string slot_label(const HorizonSpec& horizon, int slot);

/// Baseline CSV with a `kw` column; returns watts per slot.
std::vector<double> load_baseline(const std::filesystem::path& path);

/// Per-EV specs drawn deterministically from the fleet spec.
std::vector<EvSpec> generate_fleet(const FleetSpec& spec, std::span<const int> per_node,
                                   double slot_hours);

struct Scenario {
  ScenarioConfig config;
  FeederModel feeder;
  Problem problem;
};

/// Loads the feeder and baseline, draws the fleet and resolves the grouping.
Scenario assemble(const ScenarioConfig& config);

RunReport run_scenario(const Scenario& scenario);
RunReport run_scenario(const std::filesystem::path& config_path);

/// Writes trace.csv, load.csv, voltage.csv, baseline_voltage.csv,
/// charging.csv and summary.txt into `dir`.
void write_report(const std::filesystem::path& dir, const RunReport& report,
                  const Scenario& scenario);

/// Reads back what `write_report` produced: trace, loads, voltages, counters
/// and FLOPS figures. Profiles and duals are not restored.
RunReport load_report(const std::filesystem::path& dir);

struct RunComparison {
  double objective_a = 0.0;
  double objective_b = 0.0;
  double objective_delta = 0.0;     // b - a
  double objective_relative = 0.0;  // (b - a) / |a|
  Vector load_delta;                // per slot, b - a
  double max_load_delta = 0.0;
  double min_voltage_a = 0.0;
  double min_voltage_b = 0.0;
  double min_voltage_delta = 0.0;
  MeasuredSavings savings;  // a treated as the full-dimension run
};

/// Throws ValidationError when the horizons differ.
RunComparison compare_runs(const RunReport& a, const RunReport& b);

}  // namespace spmds
