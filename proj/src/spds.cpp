#include <limits>

#include "kernels.hpp"
#include "spmds/solver.hpp"

namespace spmds {

RunReport spds_run(const Problem& problem, const SolverConfig& config,
                   const IterationObserver& observer) {
  config.validate(1);
  const int n = problem.node_count();
  const int v = problem.ev_count();
  const int slots = problem.slots();
  const int workers = detail::resolve_threads(config.threads);
  const Vector powers = problem.fleet.max_powers();
  const auto& drop = problem.fleet.drop_matrix();
  const auto everyone = detail::all_evs(v);

  SolverState state;
  state.profiles = initial_profiles(problem);
  state.duals.push_back(Matrix::Zero(n, slots));
  state.epsilon = std::numeric_limits<double>::infinity();

  RunReport report;
  report.algorithm = "spds";
  report.counters.evs = v;
  report.counters.dual.assign(1, 0);
  report.flops = make_flops_report(n, 0, slots, v, v);

  std::vector<std::uint64_t> primal_flops(static_cast<std::size_t>(workers));
  ProfileMatrix next(v, slots);

  while (state.epsilon > config.tolerance && state.iteration < config.max_iterations) {
    const double scale = config.step_scale ? config.step_scale(state.iteration) : 1.0;
    auto& ops = report.counters;
    Matrix& dual = state.duals.front();

    const Vector load = aggregate_load(state.profiles, powers, problem.loads.baseline_power);
    ops.weighting += 2ull * v * slots;

    std::fill(primal_flops.begin(), primal_flops.end(), 0);
    detail::parallel_for(v, workers, [&](int i, int w) {
      const Vector gradient =
          detail::primal_kernel(i, powers[i], load, drop, dual, config.kernels, primal_flops[w]);
      const Vector u = state.profiles.row(i).transpose();
      next.row(i) = shrunken_project_primal(as_span(u), as_span(gradient), scale * config.primal_step,
                                            config.primal_shrink, problem.fleet.ev(i))
                        .transpose();
    });
    for (auto count : primal_flops) ops.primal += count;

    const ProfileMatrix& evaluated = config.dual_order == DualOrder::kJacobi ? state.profiles : next;
    const Matrix gradient = detail::dual_kernel(nullptr, problem.floor_residual, everyone, drop,
                                                evaluated, config.kernels, ops.dual.front());
    Matrix next_dual = shrunken_project_dual(dual, gradient, scale * config.dual_step(0),
                                             config.dual_shrink(0), config.dual_cap);

    const auto check = check_convergence(next, state.profiles, config.tolerance);
    state.profiles = next;
    dual = std::move(next_dual);
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
