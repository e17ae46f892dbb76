#include <random>

#include "doctest.h"

#include "oracles.hpp"
#include "spmds/errors.hpp"
#include "spmds/fleet.hpp"

using namespace spmds;

namespace {

EvSpec make_ev(double rate_sum, int node = 1) {
  EvSpec ev;
  ev.node = node;
  ev.max_power = 6600.0;
  ev.efficiency = 0.9;
  ev.slot_hours = 0.25;
  ev.initial_energy = rate_sum * ev.slot_energy();
  return ev;
}

Vector project(const std::vector<double>& y, double c) {
  return project_box_sum(std::span<const double>(y), c);
}

}  // namespace

TEST_CASE("rate sum follows energy over slot energy") {
  EvSpec ev;
  ev.max_power = 6600.0;
  ev.efficiency = 0.9;
  ev.slot_hours = 0.25;
  ev.initial_energy = -0.4 * 24000.0;
  CHECK(ev.slot_energy() == doctest::Approx(-1485.0));
  CHECK(ev.required_rate_sum() == doctest::Approx(9600.0 / 1485.0));
}

TEST_CASE("projection examples") {
  const Vector mid = project({0.5, 0.5, 0.5, 0.5}, 2.0);
  CHECK((mid - Vector::Constant(4, 0.5)).cwiseAbs().maxCoeff() < 1e-15);

  const Vector shifted = project({2.0, 0.0, 0.0}, 1.5);
  CHECK(shifted[0] == doctest::Approx(1.0));
  CHECK(shifted[1] == doctest::Approx(0.25));
  CHECK(shifted[2] == doctest::Approx(0.25));

  CHECK(project({0.3, -2.0, 5.0}, 0.0).isZero());
  CHECK((project({0.3, -2.0, 5.0}, 3.0).array() == 1.0).all());
}

TEST_CASE("projection is idempotent and matches brute force") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> spread(-2.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    Vector y(k);
    for (int j = 0; j < k; ++j) y[j] = spread(rng);
    const double c = k * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Vector p = project_box_sum(as_span(y), c);
    CHECK((p - oracle::brute_box_sum_projection(y, c)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(p.sum() - c) <= 1e-9 * std::max(1.0, c));
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
    CHECK((project_box_sum(as_span(p), c) - p).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("local projection closes the energy gap") {
  const auto ev = make_ev(2.5);
  const Vector y = Vector::LinSpaced(6, -1.0, 2.0);
  const Vector u = project_local(as_span(y), ev);
  CHECK(std::abs(ev.initial_energy - ev.slot_energy() * u.sum()) <= 1e-9 * std::abs(ev.initial_energy));
}

TEST_CASE("EV checks") {
  CHECK_NOTHROW(check_ev(make_ev(2.0), 4));
  CHECK_THROWS_AS(check_ev(make_ev(4.5), 4), InfeasibleError);
  auto bad = make_ev(1.0);
  bad.efficiency = 1.5;
  CHECK_THROWS_AS(check_ev(bad, 4), ValidationError);
  auto positive = make_ev(1.0);
  positive.initial_energy = 10.0;
  CHECK_THROWS_AS(check_ev(positive, 4), InfeasibleError);
}

TEST_CASE("aggregation and grouping") {
  const std::vector<Line> lines = {{0, 1, 0.5, 0.1}, {1, 2, 0.25, 0.1}, {1, 3, 0.125, 0.1}};
  const FeederModel feeder("f", 4160.0, lines, {{1, 0}, {1, 0}, {1, 0}});
  std::vector<EvSpec> evs = {make_ev(1.0, 2), make_ev(1.0, 3), make_ev(1.0, 2)};
  evs[1].max_power = 3300.0;
  auto fleet = build_aggregation(feeder, evs);
  const Matrix G = fleet.aggregation();
  CHECK(G.colwise().sum().isOnes());
  CHECK(G(1, 0) == 1.0);
  const Matrix expected = 2.0 * feeder.resistance() * G * fleet.max_powers().asDiagonal();
  CHECK((fleet.drop_matrix() - expected).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((fleet.drop_matrix().array() >= 0.0).all());
  CHECK(fleet.ev_nodes() == std::vector<int>{2, 3});

  ReductionPlan plan;
  plan.dimension_reduction = 1;
  plan.groups = {{{1, 2}, {1, 2}}, {{3}, {2, 3}}};
  fleet.assign_groups(plan);
  CHECK(fleet.group_of(0) == 0);
  CHECK(fleet.group_of(1) == 1);
  CHECK(fleet.group_members(0) == std::vector<int>{0, 2});
  CHECK(fleet.largest_group() == 2);
  CHECK(fleet.reduced_drop(1).row(0) == fleet.drop_matrix().row(1));
  CHECK(fleet.reduced_drop(1).row(1) == fleet.drop_matrix().row(2));

  plan.groups[1].members = {};
  CHECK_THROWS_AS(fleet.assign_groups(plan), ValidationError);
}

TEST_CASE("aggregate load and objective") {
  ProfileMatrix U(2, 3);
  U << 1, 0, 0.5, 0, 1, 0.5;
  Vector powers(2);
  powers << 2.0, 4.0;
  Vector base(3);
  base << 1, 1, 1;
  const Vector load = aggregate_load(U, powers, base);
  CHECK(load[0] == 3.0);
  CHECK(load[1] == 5.0);
  CHECK(load[2] == 4.0);
  CHECK(evaluate_objective(U, powers, base) == 0.5 * (9 + 25 + 16));
}
