#include "kernels.hpp"

#include <cmath>
#include <numeric>

namespace spmds::detail {

Vector primal_kernel(int ev, double power, const Vector& load, const Matrix& drop_rows,
                     const Matrix& dual, KernelMode mode, std::uint64_t& flops) {
  const auto slots = load.size();
  const auto rows = drop_rows.rows();
  Vector gradient(slots);
  if (mode == KernelMode::kStructured) {
    for (Eigen::Index t = 0; t < slots; ++t) {
      double acc = rows > 0 ? drop_rows(0, ev) * dual(0, t) : 0.0;
      for (Eigen::Index l = 1; l < rows; ++l) acc += drop_rows(l, ev) * dual(l, t);
      gradient[t] = power * load[t] + acc;
    }
    flops += static_cast<std::uint64_t>(slots) * (2 * rows + 1);
    return gradient;
  }

  // Dense: P~_i is P_i I_K and the stacked drop block is (rows K) x K with
  // D_i on the diagonal blocks; both products run over every entry.
  for (Eigen::Index t = 0; t < slots; ++t) {
    double own = (t == 0 ? power : 0.0) * load[0];
    for (Eigen::Index s = 1; s < slots; ++s) own += (t == s ? power : 0.0) * load[s];

    double acc = 0.0;
    bool first = true;
    for (Eigen::Index s = 0; s < slots; ++s) {
      for (Eigen::Index l = 0; l < rows; ++l) {
        const double term = (t == s ? drop_rows(l, ev) : 0.0) * dual(l, s);
        acc = first ? term : acc + term;
        first = false;
      }
    }
    gradient[t] = own + acc;
  }
  const auto k = static_cast<std::uint64_t>(slots);
  flops += k * (2 * k - 1) + (rows > 0 ? k * (2 * rows * k - 1) : 0) + k;
  return gradient;
}

Matrix dual_kernel(const Matrix* weights, const Matrix& floor_rows, std::span<const int> evs,
                   const Matrix& drop_rows, const ProfileMatrix& profiles, KernelMode mode,
                   std::uint64_t& flops) {
  const auto rows = floor_rows.rows();
  const auto slots = floor_rows.cols();
  const auto block = static_cast<std::uint64_t>(rows * slots);
  Matrix gradient = floor_rows;
  if (weights != nullptr) {
    gradient = weights->cwiseProduct(floor_rows);
    flops += block;
  }

  if (mode == KernelMode::kStructured) {
    for (int i : evs) {
      for (Eigen::Index t = 0; t < slots; ++t) {
        const double rate = profiles(i, t);
        for (Eigen::Index l = 0; l < rows; ++l) gradient(l, t) += drop_rows(l, i) * rate;
      }
    }
    flops += 2 * block * evs.size();
    return gradient;
  }

  Matrix product(rows, slots);
  for (int i : evs) {
    for (Eigen::Index t = 0; t < slots; ++t) {
      for (Eigen::Index l = 0; l < rows; ++l) {
        double acc = (t == 0 ? drop_rows(l, i) : 0.0) * profiles(i, 0);
        for (Eigen::Index s = 1; s < slots; ++s) {
          acc += (t == s ? drop_rows(l, i) : 0.0) * profiles(i, s);
        }
        product(l, t) = acc;
      }
    }
    gradient += product;
  }
  flops += (block * (2 * static_cast<std::uint64_t>(slots) - 1) + block) * evs.size();
  return gradient;
}

Matrix gather_rows(const Matrix& source, std::span<const int> nodes) {
  Matrix out(static_cast<Eigen::Index>(nodes.size()), source.cols());
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    out.row(static_cast<Eigen::Index>(l)) = source.row(nodes[l] - 1);
  }
  return out;
}

std::vector<int> all_evs(int count) {
  std::vector<int> evs(static_cast<std::size_t>(count));
  std::iota(evs.begin(), evs.end(), 0);
  return evs;
}

Matrix voltage_pu(const Problem& problem, const ProfileMatrix& profiles) {
  const Matrix squared = evaluate_voltages(problem.loads, problem.fleet.drop_matrix(), profiles);
  return squared.array().max(0.0).sqrt() / problem.slack_voltage;
}

Snapshot snapshot(const Problem& problem, const ProfileMatrix& profiles, const Vector& powers) {
  Snapshot out;
  out.objective = evaluate_objective(profiles, powers, problem.loads.baseline_power);
  out.min_voltage_pu = voltage_pu(problem, profiles).minCoeff();
  return out;
}

bool diverging(const Trace& trace, double tolerance) {
  const auto& eps = trace.epsilon;
  if (eps.empty()) return false;
  if (!std::isfinite(eps.back()) || !std::isfinite(trace.objective.back())) return true;
  constexpr std::size_t kWindow = 50;
  if (eps.size() <= kWindow) return false;
  const double then = eps[eps.size() - 1 - kWindow];
  return eps.back() > tolerance && eps.back() > 10.0 * then;
}

void finish_report(RunReport& report, const Problem& problem, const Vector& powers) {
  report.slots = problem.slots();
  report.baseline_power = problem.loads.baseline_power;
  report.total_load = aggregate_load(report.profiles, powers, problem.loads.baseline_power);
  report.voltage_pu = voltage_pu(problem, report.profiles);
  report.objective = 0.5 * report.total_load.squaredNorm();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace spmds::detail
