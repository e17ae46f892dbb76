#include "spmds/solver.hpp"

#include <cmath>
#include <limits>

#include "kernels.hpp"
#include "spmds/errors.hpp"

namespace spmds {

using detail::gather_rows;

std::string_view to_string(Termination termination) noexcept {
  switch (termination) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kDiverged: return "diverged";
  }
  return "unknown";
}

Problem make_problem(const FeederModel& feeder, HorizonLoad loads, Fleet fleet,
                     ReductionPlan plan, double voltage_floor) {
  if (!(voltage_floor > 0.0 && voltage_floor < 1.0)) {
    throw ValidationError("voltage floor must lie in (0, 1) p.u.");
  }
  if (loads.node_count() != feeder.node_count()) {
    throw ValidationError("horizon load and feeder disagree on the node count");
  }
  for (const auto& ev : fleet.evs()) check_ev(ev, loads.slots);
  fleet.assign_groups(plan);

  Problem problem;
  problem.voltage_floor = voltage_floor;
  problem.slack_voltage = feeder.slack_voltage();
  const double floor_squared = voltage_floor * voltage_floor * loads.slack_squared;
  problem.floor_residual = (-loads.compensated_voltage()).array() + floor_squared;
  problem.loads = std::move(loads);
  problem.fleet = std::move(fleet);
  problem.plan = std::move(plan);
  return problem;
}

double SolverConfig::dual_step(int group) const {
  return dual_steps.size() == 1 ? dual_steps.front() : dual_steps.at(static_cast<std::size_t>(group));
}

double SolverConfig::dual_shrink(int group) const {
  return dual_shrinks.size() == 1 ? dual_shrinks.front()
                                  : dual_shrinks.at(static_cast<std::size_t>(group));
}

void SolverConfig::validate(int group_count) const {
  std::vector<std::string> problems;
  if (!(primal_step > 0.0)) problems.emplace_back("primal step size alpha must be positive");
  if (!(primal_shrink > 0.0 && primal_shrink <= 1.0)) {
    problems.emplace_back("primal shrink tau_U must lie in (0, 1]");
  }
  const auto per_group = [&](const std::vector<double>& values, const char* name) {
    if (values.size() != 1 && static_cast<int>(values.size()) != group_count) {
      problems.push_back(std::string(name) + " needs one value or one per group (" +
                         std::to_string(group_count) + "), got " + std::to_string(values.size()));
      return false;
    }
    return true;
  };
  if (per_group(dual_steps, "dual step sizes beta")) {
    for (double beta : dual_steps) {
      if (!(beta > 0.0)) problems.emplace_back("dual step sizes beta must be positive");
    }
  }
  if (per_group(dual_shrinks, "dual shrinks tau_lambda")) {
    for (double tau : dual_shrinks) {
      if (!(tau > 0.0 && tau <= 1.0)) problems.emplace_back("dual shrinks tau_lambda must lie in (0, 1]");
    }
  }
  if (!(tolerance > 0.0)) problems.emplace_back("convergence tolerance must be positive");
  if (max_iterations < 1) problems.emplace_back("max_iterations must be at least 1");
  if (!(dual_cap >= 0.0)) problems.emplace_back("dual cap must be nonnegative");
  if (threads < 0) problems.emplace_back("thread count must be nonnegative");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

namespace {

std::vector<Matrix> omega_impl(const ProfileMatrix& profiles, const Problem& problem,
                               std::uint64_t& flops) {
  const int n = problem.node_count();
  const int slots = problem.slots();
  const int groups = problem.group_count();
  const auto& drop = problem.fleet.drop_matrix();

  std::vector<Matrix> by_group(static_cast<std::size_t>(groups));
  for (int s = 0; s < groups; ++s) {
    by_group[s] = Matrix::Zero(n, slots);
    for (int i : problem.fleet.group_members(s)) {
      for (int t = 0; t < slots; ++t) by_group[s].col(t) += drop.col(i) * profiles(i, t);
    }
    flops += 2ull * n * slots * problem.fleet.group_members(s).size();
  }
  Matrix total = by_group[0];
  for (int s = 1; s < groups; ++s) total += by_group[s];
  flops += static_cast<std::uint64_t>(groups - 1) * n * slots;

  std::vector<Matrix> weights;
  weights.reserve(static_cast<std::size_t>(groups));
  for (int s = 0; s < groups; ++s) {
    const auto& subset = problem.plan.groups[s].voltage_subset;
    Matrix omega(static_cast<Eigen::Index>(subset.size()), slots);
    for (int t = 0; t < slots; ++t) {
      for (std::size_t l = 0; l < subset.size(); ++l) {
        const double whole = total(subset[l] - 1, t);
        omega(static_cast<Eigen::Index>(l), t) = whole == 0.0 ? 1.0 : by_group[s](subset[l] - 1, t) / whole;
      }
    }
    flops += static_cast<std::uint64_t>(omega.size());
    weights.push_back(std::move(omega));
  }
  return weights;
}

Matrix combine_impl(std::span<const Matrix> weights, std::span<const Matrix> duals,
                    const Problem& problem, std::uint64_t& flops) {
  Matrix combined = Matrix::Zero(problem.node_count(), problem.slots());
  for (int s = 0; s < problem.group_count(); ++s) {
    const auto& subset = problem.plan.groups[s].voltage_subset;
    for (int t = 0; t < problem.slots(); ++t) {
      for (std::size_t l = 0; l < subset.size(); ++l) {
        const auto row = static_cast<Eigen::Index>(l);
        combined(subset[l] - 1, t) += weights[s](row, t) * duals[s](row, t);
      }
    }
    flops += 2ull * subset.size() * problem.slots();
  }
  return combined;
}

Matrix dual_impl(int group, const Matrix& weights, const ProfileMatrix& profiles,
                 const Problem& problem, DualScope scope, KernelMode mode, std::uint64_t& flops) {
  const auto& subset = problem.plan.groups[group].voltage_subset;
  const Matrix floor_rows = gather_rows(problem.floor_residual, subset);
  const auto& reduced = problem.fleet.reduced_drop(group);
  if (scope == DualScope::kGroupMembers) {
    return detail::dual_kernel(&weights, floor_rows, problem.fleet.group_members(group), reduced,
                               profiles, mode, flops);
  }
  const auto everyone = detail::all_evs(problem.ev_count());
  return detail::dual_kernel(&weights, floor_rows, everyone, reduced, profiles, mode, flops);
}

// lambda_e restricted to each group's rows; what the operator sends group s.
std::vector<Matrix> broadcast_rows(const Matrix& combined, const Problem& problem) {
  std::vector<Matrix> rows;
  for (const auto& group : problem.plan.groups) rows.push_back(gather_rows(combined, group.voltage_subset));
  return rows;
}

Vector primal_impl(int ev, const Vector& load, const std::vector<Matrix>& broadcast,
                   const Problem& problem, KernelMode mode, std::uint64_t& flops) {
  const int group = problem.fleet.group_of(ev);
  return detail::primal_kernel(ev, problem.fleet.ev(ev).max_power, load,
                               problem.fleet.reduced_drop(group), broadcast[group], mode, flops);
}

}  // namespace

std::vector<Matrix> omega_weights(const ProfileMatrix& profiles, const Problem& problem) {
  std::uint64_t flops = 0;
  return omega_impl(profiles, problem, flops);
}

Matrix combine_duals(std::span<const Matrix> weights, std::span<const Matrix> duals,
                     const Problem& problem) {
  if (static_cast<int>(weights.size()) != problem.group_count() ||
      static_cast<int>(duals.size()) != problem.group_count()) {
    throw ValidationError("need one weight and one dual block per group");
  }
  std::uint64_t flops = 0;
  return combine_impl(weights, duals, problem, flops);
}

Vector primal_gradient_reduced(int ev, const SolverState& state, const Problem& problem) {
  const Vector load = aggregate_load(state.profiles, problem.fleet.max_powers(),
                                     problem.loads.baseline_power);
  std::uint64_t flops = 0;
  return primal_impl(ev, load, broadcast_rows(state.weighted_dual, problem), problem,
                     KernelMode::kStructured, flops);
}

Matrix dual_gradient_reduced(int group, const SolverState& state, const Problem& problem,
                             DualScope scope) {
  std::uint64_t flops = 0;
  return dual_impl(group, state.weights.at(static_cast<std::size_t>(group)), state.profiles, problem,
                   scope, KernelMode::kStructured, flops);
}

Vector shrunken_project_primal(std::span<const double> profile, std::span<const double> gradient,
                               double step, double shrink, const EvSpec& ev) {
  if (profile.size() != gradient.size()) throw ValidationError("profile and gradient sizes differ");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw ValidationError("shrink must lie in (0, 1]");
  const auto slots = static_cast<Eigen::Index>(profile.size());
  const Eigen::Map<const Vector> u(profile.data(), slots);
  const Eigen::Map<const Vector> g(gradient.data(), slots);
  const Vector inner_point = shrink * u - step * g;
  const Vector inner = project_local(as_span(inner_point), ev);
  const Vector outer_point = inner / shrink;
  return project_local(as_span(outer_point), ev);
}

Matrix shrunken_project_dual(const Matrix& dual, const Matrix& gradient, double step,
                             double shrink, double cap) {
  if (dual.rows() != gradient.rows() || dual.cols() != gradient.cols()) {
    throw ValidationError("dual and gradient shapes differ");
  }
  if (!(shrink > 0.0 && shrink <= 1.0)) throw ValidationError("shrink must lie in (0, 1]");
  const Matrix inner = (shrink * dual + step * gradient).cwiseMax(0.0).cwiseMin(cap);
  return (inner / shrink).cwiseMax(0.0).cwiseMin(cap);
}

ConvergenceCheck check_convergence(const ProfileMatrix& next, const ProfileMatrix& previous,
                                   double tolerance) {
  if (next.rows() != previous.rows() || next.cols() != previous.cols()) {
    throw ValidationError("profile shapes differ");
  }
  const double epsilon = (next - previous).norm();
  return {epsilon, epsilon < tolerance};
}

ProfileMatrix initial_profiles(const Problem& problem) {
  ProfileMatrix profiles(problem.ev_count(), problem.slots());
  const Vector zero = Vector::Zero(problem.slots());
  for (int i = 0; i < problem.ev_count(); ++i) {
    profiles.row(i) = project_local(as_span(zero), problem.fleet.ev(i)).transpose();
  }
  return profiles;
}

double relaxed_lagrangian(const ProfileMatrix& profiles, const Matrix& dual,
                          const Problem& problem) {
  const double objective =
      evaluate_objective(profiles, problem.fleet.max_powers(), problem.loads.baseline_power);
  Matrix residual = problem.floor_residual;
  if (profiles.rows() > 0) residual.noalias() += problem.fleet.drop_matrix() * profiles;
  return objective + dual.cwiseProduct(residual).sum();
}

RunReport spmds_run(const Problem& problem, const SolverConfig& config,
                    const IterationObserver& observer) {
  const int groups = problem.group_count();
  config.validate(groups);
  const int v = problem.ev_count();
  const int slots = problem.slots();
  const int workers = detail::resolve_threads(config.threads);
  const Vector powers = problem.fleet.max_powers();

  SolverState state;
  state.profiles = initial_profiles(problem);
  for (int s = 0; s < groups; ++s) {
    state.duals.push_back(Matrix::Zero(static_cast<Eigen::Index>(
                                           problem.plan.groups[s].voltage_subset.size()),
                                       slots));
  }
  state.epsilon = std::numeric_limits<double>::infinity();

  RunReport report;
  report.algorithm = "spmds";
  report.counters.evs = v;
  report.counters.dual.assign(static_cast<std::size_t>(groups), 0);
  report.flops = make_flops_report(problem.node_count(), problem.plan.dimension_reduction, slots, v,
                                   problem.fleet.largest_group());

  std::vector<std::uint64_t> primal_flops(static_cast<std::size_t>(workers));
  ProfileMatrix next(v, slots);
  std::vector<Matrix> next_duals(static_cast<std::size_t>(groups));
  report.termination = Termination::kMaxIterations;

  while (state.epsilon > config.tolerance && state.iteration < config.max_iterations) {
    const double scale = config.step_scale ? config.step_scale(state.iteration) : 1.0;
    auto& ops = report.counters;

    // Operator: weights, weighted dual and the aggregate load it broadcasts.
    state.weights = omega_impl(state.profiles, problem, ops.weighting);
    state.weighted_dual = combine_impl(state.weights, state.duals, problem, ops.weighting);
    const Vector load = aggregate_load(state.profiles, powers, problem.loads.baseline_power);
    ops.weighting += 2ull * v * slots;

    // EVs: independent primal updates against lambda_e^(l).
    const auto broadcast = broadcast_rows(state.weighted_dual, problem);
    std::fill(primal_flops.begin(), primal_flops.end(), 0);
    detail::parallel_for(v, workers, [&](int i, int w) {
      const Vector gradient =
          primal_impl(i, load, broadcast, problem, config.kernels, primal_flops[w]);
      const Vector u = state.profiles.row(i).transpose();
      next.row(i) = shrunken_project_primal(as_span(u), as_span(gradient), scale * config.primal_step,
                                            config.primal_shrink, problem.fleet.ev(i))
                        .transpose();
    });
    for (auto count : primal_flops) ops.primal += count;

    // Operator: one dual update per group.
    const ProfileMatrix& evaluated = config.dual_order == DualOrder::kJacobi ? state.profiles : next;
    std::vector<Matrix> fresh_weights;
    if (config.dual_order == DualOrder::kGaussSeidel) {
      fresh_weights = omega_impl(next, problem, ops.weighting);
    }
    const auto& dual_weights =
        config.dual_order == DualOrder::kJacobi ? state.weights : fresh_weights;
    detail::parallel_for(groups, workers, [&](int s, int) {
      const Matrix gradient = dual_impl(s, dual_weights[s], evaluated, problem, config.dual_scope,
                                        config.kernels, ops.dual[s]);
      next_duals[s] = shrunken_project_dual(state.duals[s], gradient, scale * config.dual_step(s),
                                            config.dual_shrink(s), config.dual_cap);
    });

    const auto check = check_convergence(next, state.profiles, config.tolerance);
    state.profiles = next;
    state.duals = next_duals;
    state.epsilon = check.epsilon;
    ++state.iteration;
    ops.iterations = state.iteration;

    const auto snap = detail::snapshot(problem, state.profiles, powers);
    report.trace.objective.push_back(snap.objective);
    report.trace.epsilon.push_back(check.epsilon);
    report.trace.min_voltage.push_back(snap.min_voltage_pu);
    if (observer) observer(state);

    if (!check.converged && detail::diverging(report.trace, config.tolerance)) {
      report.termination = Termination::kDiverged;
      report.detail = "epsilon reached " + std::to_string(check.epsilon) + " at iteration " +
                      std::to_string(state.iteration);
      break;
    }
  }

  if (report.termination != Termination::kDiverged) {
    report.termination =
        state.epsilon <= config.tolerance ? Termination::kConverged : Termination::kMaxIterations;
  }
  report.iterations = state.iteration;
  report.profiles = std::move(state.profiles);
  report.duals = std::move(state.duals);
  detail::finish_report(report, problem, powers);
  return report;
}

}  // namespace spmds
