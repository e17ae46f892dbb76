#include "spmds/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spmds/errors.hpp"

namespace spmds {

void check_ev(const EvSpec& ev, int slots) {
  std::vector<std::string> problems;
  if (!(ev.max_power > 0.0)) problems.emplace_back("maximum charging power must be positive");
  if (!(ev.efficiency > 0.0 && ev.efficiency <= 1.0)) {
    problems.emplace_back("charging efficiency must lie in (0, 1]");
  }
  if (!(ev.slot_hours > 0.0)) problems.emplace_back("slot length must be positive");
  if (!std::isfinite(ev.initial_energy)) problems.emplace_back("initial energy must be finite");
  if (!problems.empty()) throw ValidationError(std::move(problems));

  const double need = ev.required_rate_sum();
  if (need < 0.0 || need > slots * (1.0 + 1e-12)) {
    throw InfeasibleError("EV at node " + std::to_string(ev.node) + " needs " +
                          std::to_string(-ev.initial_energy) + " Wh but can take at most " +
                          std::to_string(-ev.slot_energy() * slots) + " Wh in " +
                          std::to_string(slots) + " slots");
  }
}

Fleet::Fleet(std::vector<EvSpec> evs, std::vector<int> node_of, Matrix drop_matrix)
    : evs_(std::move(evs)), node_of_(std::move(node_of)), drop_(std::move(drop_matrix)) {}

Matrix Fleet::aggregation() const {
  Matrix g = Matrix::Zero(drop_.rows(), size());
  for (int i = 0; i < size(); ++i) g(node_of_[i] - 1, i) = 1.0;
  return g;
}

Vector Fleet::max_powers() const {
  Vector p(size());
  for (int i = 0; i < size(); ++i) p[i] = evs_[i].max_power;
  return p;
}

std::vector<int> Fleet::ev_nodes() const {
  std::vector<int> nodes = node_of_;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

void Fleet::assign_groups(const ReductionPlan& plan) {
  const int n = static_cast<int>(drop_.rows());
  const auto nodes = ev_nodes();
  if (auto issues = validate_plan(plan, n, nodes); !issues.empty()) {
    std::vector<std::string> messages;
    for (auto& issue : issues) messages.push_back(std::move(issue.message));
    throw ValidationError(std::move(messages));
  }
  std::vector<int> owner(static_cast<std::size_t>(n) + 1, -1);
  for (int s = 0; s < plan.group_count(); ++s) {
    for (int node : plan.groups[s].members) owner[node] = s;
  }
  group_of_.assign(evs_.size(), -1);
  members_.assign(static_cast<std::size_t>(plan.group_count()), {});
  for (int i = 0; i < size(); ++i) {
    group_of_[i] = owner[node_of_[i]];
    members_[group_of_[i]].push_back(i);
  }
  reduced_drop_.clear();
  for (const auto& group : plan.groups) {
    Matrix rows(static_cast<Eigen::Index>(group.voltage_subset.size()), size());
    for (std::size_t l = 0; l < group.voltage_subset.size(); ++l) {
      rows.row(static_cast<Eigen::Index>(l)) = drop_.row(group.voltage_subset[l] - 1);
    }
    reduced_drop_.push_back(std::move(rows));
  }
}

int Fleet::largest_group() const noexcept {
  std::size_t largest = 0;
  for (const auto& members : members_) largest = std::max(largest, members.size());
  return static_cast<int>(largest);
}

Fleet build_aggregation(const FeederModel& feeder, std::vector<EvSpec> evs) {
  const int n = feeder.node_count();
  const auto v = static_cast<Eigen::Index>(evs.size());
  Matrix drop(n, v);
  std::vector<int> node_of(evs.size());
  for (Eigen::Index i = 0; i < v; ++i) {
    const auto& ev = evs[i];
    if (ev.node < 1 || ev.node > n) {
      throw ValidationError("EV " + std::to_string(i) + " is attached to unknown node " +
                            std::to_string(ev.node));
    }
    if (!(ev.max_power > 0.0)) {
      throw ValidationError("EV " + std::to_string(i) + " has a non-positive charging power");
    }
    node_of[i] = ev.node;
    drop.col(i) = 2.0 * ev.max_power * feeder.resistance().col(ev.node - 1);
  }
  return Fleet(std::move(evs), std::move(node_of), std::move(drop));
}

Vector project_box_sum(std::span<const double> profile, double rate_sum) {
  const auto slots = static_cast<Eigen::Index>(profile.size());
  const Eigen::Map<const Vector> y(profile.data(), slots);
  const double scale = std::max(1.0, std::abs(rate_sum));
  if (!(rate_sum >= -1e-12 * scale) || !(rate_sum <= slots + 1e-12 * scale)) {
    throw InfeasibleError("no profile in the unit box sums to " + std::to_string(rate_sum) +
                          " over " + std::to_string(slots) + " slots");
  }
  const double target = std::clamp(rate_sum, 0.0, static_cast<double>(slots));
  if (target == 0.0) return Vector::Zero(slots);
  if (target == static_cast<double>(slots)) return Vector::Ones(slots);

  const double eps = std::numeric_limits<double>::epsilon();
  if (y.minCoeff() >= 0.0 && y.maxCoeff() <= 1.0 &&
      std::abs(y.sum() - target) <= 4.0 * eps * slots * std::max(1.0, target)) {
    return y;
  }

  auto clipped_sum = [&](double shift) {
    return (y.array() - shift).min(1.0).max(0.0).sum();
  };
  // The clipped sum is non-increasing in the shift.
  double lo = y.minCoeff() - 1.0;
  double hi = y.maxCoeff();
  for (int iter = 0; iter < 200 && hi - lo > eps * std::max(std::abs(lo), std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (clipped_sum(mid) > target ? lo : hi) = mid;
  }
  double shift = 0.5 * (lo + hi);

  // Solve exactly on the free set identified by the bisection.
  double free_sum = 0.0;
  int free_count = 0;
  int saturated = 0;
  for (Eigen::Index t = 0; t < slots; ++t) {
    const double value = y[t] - shift;
    if (value >= 1.0) {
      ++saturated;
    } else if (value > 0.0) {
      free_sum += y[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum - (target - saturated)) / free_count;
    if (std::abs(clipped_sum(exact) - target) <= std::abs(clipped_sum(shift) - target)) {
      shift = exact;
    }
  }
  return (y.array() - shift).min(1.0).max(0.0);
}

Vector project_local(std::span<const double> profile, const EvSpec& ev) {
  return project_box_sum(profile, ev.required_rate_sum());
}

Vector aggregate_load(const ProfileMatrix& profiles, const Vector& max_powers,
                      const Vector& baseline_power) {
  if (profiles.rows() != max_powers.size() || profiles.cols() != baseline_power.size()) {
    throw ValidationError("load aggregation dimensions disagree");
  }
  Vector load = baseline_power;
  for (Eigen::Index i = 0; i < profiles.rows(); ++i) {
    load += max_powers[i] * profiles.row(i).transpose();
  }
  return load;
}

double evaluate_objective(const ProfileMatrix& profiles, const Vector& max_powers,
                          const Vector& baseline_power) {
  return 0.5 * aggregate_load(profiles, max_powers, baseline_power).squaredNorm();
}

}  // namespace spmds
