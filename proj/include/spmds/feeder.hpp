#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spmds/types.hpp"

namespace spmds {

// A line between a node and its parent. Node 0 is the slack bus; load nodes
// are numbered 1..n. Impedances are per-phase ohms.
struct Line {
  int parent = 0;
  int child = 0;
  double resistance = 0.0;
  double reactance = 0.0;
};

// Optional per-node scenario data carried by a feeder document.
struct NodeData {
  double load_share = 0.0;  // fraction of the feeder baseline drawn here
  int ev_count = 0;
};

/// Radial distribution feeder with its graphical resistance and reactance
/// matrices. Matrix row/column k refers to node k + 1; the slack node is not
/// part of either matrix.
class FeederModel {
 public:
  FeederModel(std::string name, double slack_voltage, std::vector<Line> lines,
              std::vector<NodeData> nodes = {});

  const std::string& name() const noexcept { return name_; }
  int node_count() const noexcept { return node_count_; }
  /// Line-to-line slack voltage magnitude in volts.
  double slack_voltage() const noexcept { return slack_voltage_; }
  const std::vector<Line>& lines() const noexcept { return lines_; }
  const std::vector<NodeData>& nodes() const noexcept { return nodes_; }
  const Matrix& resistance() const noexcept { return resistance_; }
  const Matrix& reactance() const noexcept { return reactance_; }

  /// Parent of `node` (1..n); the slack node has no parent.
  int parent(int node) const { return parent_.at(static_cast<std::size_t>(node)); }
  /// Lines on the path from the slack node down to `node`, slack end first.
  std::vector<const Line*> root_path(int node) const;

 private:
  std::string name_;
  double slack_voltage_;
  int node_count_;
  std::vector<Line> lines_;
  std::vector<NodeData> nodes_;
  std::vector<int> parent_;
  std::vector<int> parent_line_;
  Matrix resistance_;
  Matrix reactance_;
};

/// Checks that `lines` form a tree over nodes 0..node_count rooted at 0 and
/// returns the parent of every node (entry 0 is -1).
std::vector<int> check_radial_topology(int node_count, std::span<const Line> lines);

/// Builds R and X where entry (i, j) sums the impedance of the lines shared by
/// the slack-to-i and slack-to-j paths.
std::pair<Matrix, Matrix> build_graph_matrices(int node_count, std::span<const Line> lines);

FeederModel parse_feeder(std::string_view document);
FeederModel load_feeder(const std::filesystem::path& path);

/// Baseline demand over a scheduling horizon. Power is in watts, voltages are
/// squared line-to-line magnitudes in V^2, matrices are node x slot.
struct HorizonLoad {
  int slots = 0;
  Vector baseline_power;   // P_b, total feeder demand per slot
  Matrix baseline_drop;    // V_b, drop caused by the baseline at every node
  double slack_squared = 0.0;

  int node_count() const noexcept { return static_cast<int>(baseline_drop.rows()); }
  /// V_c = V0^2 - V_b.
  Matrix compensated_voltage() const;
};

/// Spreads `baseline_power` over the nodes by their load shares and applies
/// LinDistFlow with a fixed power factor for the reactive part.
HorizonLoad make_horizon_load(const FeederModel& feeder, std::span<const double> baseline_power,
                              double power_factor);

/// Squared voltages V_c - sum_i D_i u_i for every node and slot.
/// `drop_matrix` is n x v, `profiles` is v x K.
Matrix evaluate_voltages(const HorizonLoad& loads, const Matrix& drop_matrix,
                         const ProfileMatrix& profiles);

/// Row-major CSV with a header row of node ids.
void write_matrix_csv(std::ostream& out, const Matrix& matrix);

}  // namespace spmds
