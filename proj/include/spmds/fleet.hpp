#pragma once

#include <span>
#include <vector>

#include "spmds/feeder.hpp"
#include "spmds/reduction.hpp"
#include "spmds/types.hpp"

namespace spmds {

/// One EV. Power is in watts, energy in watt-hours.
struct EvSpec {
  int node = 0;
  double max_power = 0.0;
  double efficiency = 1.0;
  /// Signed energy state at the start of the horizon; negative means energy
  /// still owed to the battery.
  double initial_energy = 0.0;
  double slot_hours = 0.25;

  /// B_i = -eta * dt * P_max, the (negative) energy change of a full-rate slot.
  double slot_energy() const noexcept { return -efficiency * slot_hours * max_power; }
  /// Sum over the horizon of the normalized rate needed to close the deficit.
  double required_rate_sum() const noexcept { return initial_energy / slot_energy(); }
};

/// Throws ValidationError for out-of-range parameters and InfeasibleError
/// when the deficit cannot be delivered within `slots` full-rate slots.
void check_ev(const EvSpec& ev, int slots);

/// EVs attached to a feeder with their voltage-drop sensitivities.
class Fleet {
 public:
  Fleet() = default;
  Fleet(std::vector<EvSpec> evs, std::vector<int> node_of, Matrix drop_matrix);

  int size() const noexcept { return static_cast<int>(evs_.size()); }
  const std::vector<EvSpec>& evs() const noexcept { return evs_; }
  const EvSpec& ev(int i) const { return evs_.at(static_cast<std::size_t>(i)); }
  /// D = 2 R G P, node x EV, V^2 per unit charging rate.
  const Matrix& drop_matrix() const noexcept { return drop_; }
  /// G, node x EV with a single 1 per column.
  Matrix aggregation() const;
  Vector max_powers() const;
  /// Distinct nodes hosting at least one EV, ascending.
  std::vector<int> ev_nodes() const;

  /// Attaches a grouping: EVs inherit the group that collects their node and
  /// every group gets D restricted to its voltage subset rows.
  void assign_groups(const ReductionPlan& plan);
  bool grouped() const noexcept { return !group_of_.empty() || evs_.empty(); }
  int group_of(int i) const { return group_of_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& group_members(int s) const { return members_.at(static_cast<std::size_t>(s)); }
  /// (n - d) x v.
  const Matrix& reduced_drop(int s) const { return reduced_drop_.at(static_cast<std::size_t>(s)); }
  int group_count() const noexcept { return static_cast<int>(members_.size()); }
  /// Size of the largest group.
  int largest_group() const noexcept;

 private:
  std::vector<EvSpec> evs_;
  std::vector<int> node_of_;
  Matrix drop_;
  std::vector<int> group_of_;
  std::vector<std::vector<int>> members_;
  std::vector<Matrix> reduced_drop_;
};

Fleet build_aggregation(const FeederModel& feeder, std::vector<EvSpec> evs);

/// Euclidean projection of `profile` onto {0 <= u <= 1, sum(u) = rate_sum}.
Vector project_box_sum(std::span<const double> profile, double rate_sum);

/// Projection onto the EV's local feasible set: the unit box intersected with
/// the energy-completion hyperplane B sum(u) = x (both sides negative: the
/// delivered energy equals the deficit).
Vector project_local(std::span<const double> profile, const EvSpec& ev);

/// P_b + sum_i P_i u_i per slot.
Vector aggregate_load(const ProfileMatrix& profiles, const Vector& max_powers,
                      const Vector& baseline_power);

/// 0.5 * ||P_b + P~ U||^2.
double evaluate_objective(const ProfileMatrix& profiles, const Vector& max_powers,
                          const Vector& baseline_power);

}  // namespace spmds
