#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spmds/accounting.hpp"
#include "spmds/feeder.hpp"
#include "spmds/fleet.hpp"
#include "spmds/reduction.hpp"
#include "spmds/types.hpp"

namespace spmds {

/// Everything the iteration needs about the network and the fleet.
struct Problem {
  HorizonLoad loads;
  Fleet fleet;  // grouped according to `plan`
  ReductionPlan plan;
  double voltage_floor = 0.954;  // lower bound in p.u.
  double slack_voltage = 0.0;    // V0 in volts
  /// Y_b = floor^2 V0^2 - V_c, node x slot. The voltage constraint reads
  /// Y_b + sum_i D_i u_i <= 0.
  Matrix floor_residual;

  int node_count() const noexcept { return loads.node_count(); }
  int slots() const noexcept { return loads.slots; }
  int ev_count() const noexcept { return fleet.size(); }
  int group_count() const noexcept { return plan.group_count(); }
  int subset_size() const noexcept { return node_count() - plan.dimension_reduction; }
};

/// Validates the EVs against the horizon, attaches the grouping to the fleet
/// and precomputes Y_b.
Problem make_problem(const FeederModel& feeder, HorizonLoad loads, Fleet fleet,
                     ReductionPlan plan, double voltage_floor);

enum class DualOrder {
  kJacobi,       // dual step evaluated at U^(l), the default
  kGaussSeidel,  // dual step evaluated at the freshly uploaded U^(l+1)
};

enum class DualScope {
  kGroupMembers,  // group s sums D_{d,i} U_i over its own EVs
  kWholeFleet,    // group s sums D_{d,i} U_i over every EV
};

enum class KernelMode {
  kStructured,  // exploit the block-diagonal structure of the stacked D blocks
  kDense,       // multiply through the stacked blocks as dense matrices
};

struct SolverConfig {
  double primal_step = 0.0;          // alpha
  std::vector<double> dual_steps;    // beta_s, one per group or a single shared value
  double primal_shrink = 1.0;        // tau_U
  std::vector<double> dual_shrinks;  // tau_lambda_s, one per group or a single shared value
  double tolerance = 1e-3;           // epsilon_0
  int max_iterations = 100;
  double dual_cap = 1e6;             // the dual box is [0, dual_cap]
  DualOrder dual_order = DualOrder::kJacobi;
  DualScope dual_scope = DualScope::kGroupMembers;
  KernelMode kernels = KernelMode::kStructured;
  int threads = 1;  // 0 picks the hardware concurrency
  /// Multiplies alpha and every beta at iteration l. Empty means constant steps.
  std::function<double(int)> step_scale;

  double dual_step(int group) const;
  double dual_shrink(int group) const;
  /// Throws ValidationError listing every bad field.
  void validate(int group_count) const;
};

struct SolverState {
  ProfileMatrix profiles;        // U, EV x slot
  std::vector<Matrix> duals;     // lambda_s, (n - d) x slot, rows follow the group's subset
  Matrix weighted_dual;          // lambda_e on every node, node x slot
  std::vector<Matrix> weights;   // omega_s, shaped like lambda_s
  int iteration = 0;
  double epsilon = 0.0;
};

enum class Termination { kConverged, kMaxIterations, kDiverged };

std::string_view to_string(Termination termination) noexcept;

struct Trace {
  std::vector<double> objective;
  std::vector<double> epsilon;
  std::vector<double> min_voltage;  // p.u.
};

struct RunReport {
  std::string algorithm;
  Termination termination = Termination::kMaxIterations;
  std::string detail;
  int iterations = 0;
  int slots = 0;
  ProfileMatrix profiles;
  std::vector<Matrix> duals;
  Trace trace;
  Vector baseline_power;
  Vector total_load;
  Matrix voltage_pu;  // node x slot
  double objective = 0.0;
  OpCounts counters;
  FlopsReport flops;
  std::uint64_t seed = 0;
};

using IterationObserver = std::function<void(const SolverState&)>;

/// Block i of the reduced primal gradient:
/// P_i (P_b + sum_j P_j u_j) + D_{d,i}^T lambda_e on EV i's group rows.
Vector primal_gradient_reduced(int ev, const SolverState& state, const Problem& problem);

/// omega_s .* Y_{b,s} + sum_i D_{d,i} U_i on group s's rows; the sum runs over
/// the group's EVs or the whole fleet depending on `scope`.
Matrix dual_gradient_reduced(int group, const SolverState& state, const Problem& problem,
                             DualScope scope = DualScope::kGroupMembers);

/// Share of the charging-induced drop caused by each group on that group's
/// voltage rows; entries whose total drop is zero are 1 for every group.
std::vector<Matrix> omega_weights(const ProfileMatrix& profiles, const Problem& problem);

/// lambda_e = sum_s omega_s .* lambda_s, scattered onto the global node rows.
Matrix combine_duals(std::span<const Matrix> weights, std::span<const Matrix> duals,
                     const Problem& problem);

/// Pi_U((1/tau) Pi_U(tau u - alpha g)).
Vector shrunken_project_primal(std::span<const double> profile, std::span<const double> gradient,
                               double step, double shrink, const EvSpec& ev);

/// Pi_D((1/tau) Pi_D(tau lambda + beta g)) with D = [0, cap].
Matrix shrunken_project_dual(const Matrix& dual, const Matrix& gradient, double step,
                             double shrink, double cap);

struct ConvergenceCheck {
  double epsilon = 0.0;
  bool converged = false;
};

/// epsilon = ||U_new - U_old||_2 over every entry; converged when below tol.
ConvergenceCheck check_convergence(const ProfileMatrix& next, const ProfileMatrix& previous,
                                   double tolerance);

/// U^(0): each EV's projection of the zero profile.
ProfileMatrix initial_profiles(const Problem& problem);

/// The shrunken primal multi-dual iteration.
RunReport spmds_run(const Problem& problem, const SolverConfig& config,
                    const IterationObserver& observer = {});

/// Full-dimension single-dual baseline. Ignores the grouping in `problem`.
RunReport spds_run(const Problem& problem, const SolverConfig& config,
                   const IterationObserver& observer = {});

/// L(U, lambda) = F(U) + lambda^T (Y_b + sum_i D_i u_i) with lambda over every
/// node and slot.
double relaxed_lagrangian(const ProfileMatrix& profiles, const Matrix& dual,
                          const Problem& problem);

}  // namespace spmds
