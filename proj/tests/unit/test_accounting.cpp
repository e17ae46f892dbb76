#include "doctest.h"

#include "oracles.hpp"
#include "spmds/accounting.hpp"
#include "spmds/errors.hpp"
#include "spmds/solver.hpp"

using namespace spmds;

TEST_CASE("closed-form savings for the shipped feeders") {
  const auto p13 = flops_primal(12, 5, 52);
  CHECK(p13.saved == 27040);
  CHECK(p13.ratio == Ratio::make(260, 727));
  CHECK(p13.ratio.percent() == "35.76");
  const auto d13 = flops_dual(12, 5, 52, 500, 300);
  CHECK(d13.saved == 21090836);
  CHECK(d13.ratio.percent() == "65.00");
  CHECK_FALSE(d13.negative);

  const auto p123 = flops_primal(122, 54, 52);
  CHECK(p123.saved == 292032);
  CHECK(p123.ratio.percent() == "43.56");
  const auto d123 = flops_dual(122, 54, 52, 600, 340);
  CHECK(d123.saved == 270829104);
  CHECK(d123.ratio.percent() == "68.41");
}

TEST_CASE("hand-computed small inputs") {
  const auto p = flops_primal(3, 1, 2);
  CHECK(p.saved == 8);
  CHECK(p.ratio == Ratio::make(2, 9));
  CHECK(flops_primal(12, 0, 52).saved == 0);
  CHECK(flops_primal(12, 0, 52).ratio.percent() == "0.00");
  CHECK(flops_primal(1, 1, 1).saved == 2);
  CHECK(flops_primal(1, 1, 1).ratio == Ratio::make(1, 2));
}

TEST_CASE("degenerate dual inputs go negative and are flagged") {
  const auto d = flops_dual(12, 0, 52, 10, 10);
  CHECK(d.saved == -12 * 52);
  CHECK(d.negative);
  CHECK(d.ratio.percent().front() == '-');
}

TEST_CASE("invalid FLOPS inputs are rejected") {
  CHECK_THROWS_AS(flops_primal(5, 6, 4), ValidationError);
  CHECK_THROWS_AS(flops_primal(5, 1, 0), ValidationError);
  CHECK_THROWS_AS(flops_dual(5, 1, 4, 3, 4), ValidationError);
}

TEST_CASE("savings grow with the dimension reduction") {
  for (int d = 0; d < 54; ++d) {
    CHECK(flops_primal(122, d + 1, 52).saved > flops_primal(122, d, 52).saved);
    CHECK(flops_dual(122, d + 1, 52, 600, 340).ratio.value() >
          flops_dual(122, d, 52, 600, 340).ratio.value());
  }
}

TEST_CASE("percent rounds half away from zero") {
  CHECK(Ratio::make(1, 8).percent(1) == "12.5");
  CHECK(Ratio::make(1, 8).percent(0) == "13");
  CHECK(Ratio::make(-1, 8).percent(0) == "-13");
  CHECK(Ratio::make(2, 3).percent() == "66.67");
  CHECK(Ratio::make(3, -6) == Ratio{-1, 2});
}

TEST_CASE("zero-iteration run has zero counters") {
  const RunReport empty;
  const auto counts = empirical_counters(empty);
  CHECK(counts.primal_per_ev == 0.0);
  CHECK(counts.dual_critical_path == 0.0);
  CHECK(counts.weighting == 0.0);
}

TEST_CASE("dense counters reproduce the closed forms") {
  oracle::InstanceSpec spec;
  spec.nodes = 8;
  spec.evs = 12;
  spec.slots = 6;
  spec.groups = 3;
  spec.dimension_reduction = 4;
  spec.seed = 21;
  const auto reduced = oracle::make_instance(spec);
  SolverConfig config;
  config.primal_step = 1e-11;
  config.dual_steps = {1e-3};
  config.dual_shrinks = {1.0};
  config.max_iterations = 3;
  config.tolerance = 1e-300;
  config.kernels = KernelMode::kDense;

  const auto full_run = spds_run(reduced.problem, config);
  const auto reduced_run = spmds_run(reduced.problem, config);
  const auto& p = reduced.problem;
  CHECK(reduced_run.flops.d == 4);
  CHECK(reduced_run.flops.largest_group == p.fleet.largest_group());

  const auto savings = compare_counters(full_run, reduced_run);
  CHECK(savings.primal_saved == doctest::Approx(static_cast<double>(savings.formula.primal.saved)));
  CHECK(savings.dual_saved == doctest::Approx(static_cast<double>(savings.formula.dual.saved)));
  CHECK(savings.primal_agreement == doctest::Approx(1.0));
  CHECK(savings.dual_agreement == doctest::Approx(1.0));
  CHECK(savings.dual_ratio == doctest::Approx(savings.formula.dual.ratio.value()));

  // d = 0 against d > 0 with the same fleet: primal savings per EV equal 2 d K^2.
  spec.groups = 1;
  spec.dimension_reduction = 0;
  const auto base = oracle::make_instance(spec);
  const auto base_run = spmds_run(base.problem, config);
  const auto primal_only = compare_counters(base_run, reduced_run);
  CHECK(primal_only.primal_saved == doctest::Approx(2.0 * 4 * 6 * 6));

  const auto counts = empirical_counters(reduced_run);
  CHECK(counts.primal_per_ev == doctest::Approx(2.0 * 36 * (8 - 4 + 1) - 6));
}

TEST_CASE("op counts merge") {
  OpCounts a;
  a.primal = 3;
  a.dual = {1, 2};
  OpCounts b;
  b.primal = 4;
  b.dual = {5, 1, 7};
  b.weighting = 2;
  a += b;
  CHECK(a.primal == 7);
  CHECK(a.dual == std::vector<std::uint64_t>{6, 3, 7});
  CHECK(a.dual_critical_path() == 7);
  CHECK(a.dual_total() == 16);
  CHECK(a.weighting == 2);
}
