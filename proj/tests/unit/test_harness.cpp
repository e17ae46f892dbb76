#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "spmds/errors.hpp"
#include "spmds/scenario.hpp"

using namespace spmds;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SPMDS_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("spmds_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ScenarioConfig shipped13() { return load_scenario(kSource / "scenarios/ieee13.scenario"); }

}  // namespace

TEST_CASE("clock parsing and slot labels") {
  CHECK(parse_clock("19:00") == 19 * 60);
  CHECK(parse_clock("08:15") == 8 * 60 + 15);
  CHECK_THROWS_AS(parse_clock("25:00"), ValidationError);
  CHECK_THROWS_AS(parse_clock("noon"), ValidationError);
  HorizonSpec h;
  CHECK(slot_label(h, 0) == "19:00");
  CHECK(slot_label(h, 1) == "19:15");
  CHECK(slot_label(h, 20) == "00:00");
  CHECK(slot_label(h, 51) == "07:45");
}

TEST_CASE("shipped scenarios parse with the stated parameters") {
  const auto config = shipped13();
  CHECK(config.horizon.slots == 52);
  CHECK(config.horizon.slot_hours == 0.25);
  CHECK(config.fleet.max_power_kw == 6.6);
  CHECK(config.grouping.explicit_groups.size() == 3);
  CHECK(config.grouping.explicit_groups[1].voltage_subset == std::vector<int>{4, 5, 6, 7, 8, 9, 10});
  CHECK(config.solver.dual_steps == std::vector<double>{1.8});
  CHECK(config.solver.max_iterations == 20);
  CHECK(validate_scenario(config, 12).empty());

  const auto big = load_scenario(kSource / "scenarios/ieee123.scenario");
  CHECK(validate_scenario(big, 122).empty());
}

TEST_CASE("validation lists every bad field") {
  auto config = shipped13();
  config.horizon.slots = 50;
  config.voltage_floor = 1.2;
  config.fleet.efficiency = 0.0;
  config.solver.primal_step = -1.0;
  const auto problems = validate_scenario(config, 12);
  CHECK(problems.size() >= 4);
}

TEST_CASE("dimension reduction beyond the bound names the bound") {
  auto config = shipped13();
  config.grouping.dimension_reduction = 9;
  const auto problems = validate_scenario(config, 12);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("= 8") != std::string::npos);
  CHECK_THROWS_AS(assemble(config), ValidationError);
}

TEST_CASE("missing files surface as I/O errors") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.scenario"), IoError);
  auto config = shipped13();
  config.baseline = "/nonexistent/baseline.csv";
  CHECK_THROWS_AS(assemble(config), IoError);
}

TEST_CASE("malformed scenario documents are rejected") {
  CHECK_THROWS_AS(parse_scenario("{", "."), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"feeder": "a"})", "."), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"feeder": "a", "baseline": "b", "solver": {"kernels": "x"}})", "."),
                  ValidationError);
}

TEST_CASE("fleet generation is deterministic and within range") {
  FleetSpec spec;
  const std::vector<int> per_node = {0, 3, 2};
  const auto a = generate_fleet(spec, per_node, 0.25);
  const auto b = generate_fleet(spec, per_node, 0.25);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].initial_energy == b[i].initial_energy);
    CHECK(-a[i].initial_energy >= 0.2 * 24000.0);
    CHECK(-a[i].initial_energy <= 0.6 * 24000.0);
    CHECK(a[i].max_power == 6600.0);
  }
  CHECK(a[0].node == 2);
  CHECK(a[4].node == 3);
  spec.seed = 7;
  CHECK(generate_fleet(spec, per_node, 0.25)[0].initial_energy != a[0].initial_energy);
}

TEST_CASE("shipped 13-bus scenario assembles to the table counts") {
  const auto scenario = assemble(shipped13());
  const auto& fleet = scenario.problem.fleet;
  CHECK(fleet.size() == 500);
  CHECK(fleet.group_members(0).size() == 100);
  CHECK(fleet.group_members(1).size() == 100);
  CHECK(fleet.group_members(2).size() == 300);
  CHECK(scenario.problem.subset_size() == 7);
}

TEST_CASE("reports round-trip and compare") {
  auto config = shipped13();
  config.solver.max_iterations = 3;
  const auto scenario = assemble(config);
  const auto report = run_scenario(scenario);
  const auto dir = scratch("roundtrip");
  write_report(dir, report, scenario);
  for (const char* name : {"trace.csv", "load.csv", "voltage.csv", "baseline_voltage.csv",
                           "charging.csv", "summary.txt"}) {
    CHECK(fs::exists(dir / name));
  }
  const auto loaded = load_report(dir);
  CHECK(loaded.iterations == 3);
  CHECK(loaded.algorithm == "spmds");
  CHECK(loaded.flops.primal.saved == 27040);
  CHECK(loaded.counters.primal == report.counters.primal);
  CHECK(loaded.counters.dual == report.counters.dual);
  CHECK(loaded.trace.epsilon == report.trace.epsilon);
  CHECK(loaded.total_load.size() == 52);
  CHECK((loaded.total_load - report.total_load).cwiseAbs().maxCoeff() < 1e-6);

  const auto same = compare_runs(loaded, loaded);
  CHECK(same.objective_delta == 0.0);
  CHECK(same.max_load_delta == 0.0);
  CHECK(same.min_voltage_delta == 0.0);

  RunReport shorter = loaded;
  shorter.slots = 10;
  CHECK_THROWS_AS(compare_runs(loaded, shorter), ValidationError);
  CHECK_THROWS_AS(load_report(dir / "missing"), IoError);
}

TEST_CASE("repeated runs write identical files") {
  auto config = shipped13();
  config.solver.max_iterations = 4;
  const auto scenario = assemble(config);
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  write_report(a, run_scenario(scenario), scenario);
  write_report(b, run_scenario(assemble(config)), scenario);
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
}
