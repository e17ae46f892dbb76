#include "spmds/reduction.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "spmds/csv.hpp"
#include "spmds/errors.hpp"

namespace spmds {

namespace {

std::string node_list(const std::vector<int>& nodes) {
  std::string out;
  for (int node : nodes) {
    if (!out.empty()) out += ' ';
    out += std::to_string(node);
  }
  return out;
}

}  // namespace

Matrix commonly_reduced(const Matrix& resistance) {
  const auto n = static_cast<double>(resistance.rows());
  if (resistance.size() == 0) return resistance;
  return resistance.array() - resistance.sum() / (n * n);
}

Matrix peak_preserved(const Matrix& resistance) {
  if (resistance.size() == 0) return resistance;
  const Eigen::RowVectorXd column_mean = resistance.colwise().mean();
  return resistance.rowwise() - column_mean;
}

std::vector<int> column_peaks(const Matrix& peak_preserved) {
  std::vector<int> peaks(static_cast<std::size_t>(peak_preserved.cols()), 0);
  for (Eigen::Index j = 0; j < peak_preserved.cols(); ++j) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < peak_preserved.rows(); ++i) {
      if (peak_preserved(i, j) > best) {
        best = peak_preserved(i, j);
        peaks[j] = static_cast<int>(i) + 1;
      }
    }
  }
  return peaks;
}

ReductionPlan full_dimension_plan(int node_count, std::span<const int> ev_nodes) {
  Group group;
  group.voltage_subset.resize(static_cast<std::size_t>(node_count));
  for (int k = 0; k < node_count; ++k) group.voltage_subset[k] = k + 1;
  group.members.assign(ev_nodes.begin(), ev_nodes.end());
  std::sort(group.members.begin(), group.members.end());
  group.members.erase(std::unique(group.members.begin(), group.members.end()),
                      group.members.end());
  ReductionPlan plan;
  plan.groups.push_back(std::move(group));
  return plan;
}

int max_dimension_reduction(int node_count, int group_count) {
  if (group_count < 1) return 0;
  return node_count * (group_count - 1) / group_count;
}

std::vector<PlanViolation> validate_plan(const ReductionPlan& plan, int node_count,
                                         std::span<const int> ev_nodes) {
  std::vector<PlanViolation> out;
  const int r = plan.group_count();
  const int d = plan.dimension_reduction;

  if (r < 1 || r > node_count) {
    out.push_back({PlanIssue::kGroupCount, "group count " + std::to_string(r) +
                                               " must lie in 1.." + std::to_string(node_count)});
  }
  if (r >= 1 && (d < 0 || static_cast<long long>(d) * r >
                              static_cast<long long>(node_count) * (r - 1))) {
    out.push_back({PlanIssue::kDimensionBound,
                   "dimension reduction d=" + std::to_string(d) + " breaks 0 <= d <= n(1-1/r) = " +
                       std::to_string(max_dimension_reduction(node_count, r)) + " for n=" +
                       std::to_string(node_count) + ", r=" + std::to_string(r)});
  }

  std::vector<int> covered(static_cast<std::size_t>(node_count) + 1, 0);
  for (int s = 0; s < r; ++s) {
    const auto& subset = plan.groups[s].voltage_subset;
    const auto label = "group " + std::to_string(s + 1);
    if (static_cast<int>(subset.size()) != node_count - d) {
      out.push_back({PlanIssue::kSubsetSize, label + " monitors " + std::to_string(subset.size()) +
                                                 " nodes, expected n-d=" +
                                                 std::to_string(node_count - d)});
    }
    std::set<int> seen;
    for (int node : subset) {
      if (node < 1 || node > node_count) {
        out.push_back({PlanIssue::kSubsetRange,
                       label + " monitors unknown node " + std::to_string(node)});
      } else if (!seen.insert(node).second) {
        out.push_back({PlanIssue::kSubsetRange,
                       label + " lists node " + std::to_string(node) + " twice"});
      } else {
        covered[node] = 1;
      }
    }
  }
  std::vector<int> uncovered;
  for (int node = 1; node <= node_count; ++node) {
    if (!covered[node]) uncovered.push_back(node);
  }
  if (!uncovered.empty()) {
    out.push_back({PlanIssue::kCoverage,
                   "voltage subsets leave nodes uncovered: " + node_list(uncovered)});
  }

  std::vector<int> owner(static_cast<std::size_t>(node_count) + 1, 0);
  for (int s = 0; s < r; ++s) {
    for (int node : plan.groups[s].members) {
      if (node < 1 || node > node_count) {
        out.push_back({PlanIssue::kMemberRange, "group " + std::to_string(s + 1) +
                                                    " collects unknown node " +
                                                    std::to_string(node)});
      } else if (owner[node] != 0) {
        out.push_back({PlanIssue::kMemberOverlap,
                       "node " + std::to_string(node) + " belongs to groups " +
                           std::to_string(owner[node]) + " and " + std::to_string(s + 1)});
      } else {
        owner[node] = s + 1;
      }
    }
  }
  std::vector<int> orphans;
  for (int node : ev_nodes) {
    if (node >= 1 && node <= node_count && owner[node] == 0) orphans.push_back(node);
  }
  std::sort(orphans.begin(), orphans.end());
  orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());
  if (!orphans.empty()) {
    out.push_back({PlanIssue::kMemberCoverage,
                   "EV nodes without a group: " + node_list(orphans)});
  }
  return out;
}

ReductionPlan propose_grouping(const Matrix& commonly_reduced, const Matrix& peak_preserved,
                               int group_count, int dimension_reduction,
                               std::span<const int> ev_nodes) {
  const int n = static_cast<int>(peak_preserved.rows());
  const int r = group_count;
  const int d = dimension_reduction;
  if (peak_preserved.cols() != n || commonly_reduced.rows() != n || commonly_reduced.cols() != n) {
    throw ValidationError("reduction matrices must both be square with matching size");
  }
  if (r < 1 || r > n) {
    throw InfeasibleError("group count " + std::to_string(r) + " must lie in 1.." +
                          std::to_string(n));
  }
  if (d < 0 || d > max_dimension_reduction(n, r)) {
    throw InfeasibleError("dimension reduction d=" + std::to_string(d) +
                          " cannot cover all nodes with " + std::to_string(r) +
                          " windows; the bound n(1-1/r) allows at most " +
                          std::to_string(max_dimension_reduction(n, r)));
  }
  const int width = n - d;

  ReductionPlan plan;
  plan.dimension_reduction = d;
  plan.commonly_reduced = commonly_reduced;
  plan.peak_preserved = peak_preserved;
  plan.groups.resize(static_cast<std::size_t>(r));
  std::vector<int> start(static_cast<std::size_t>(r), 1);
  for (int s = 1; s < r; ++s) {
    // 1 + round(s (n - width) / (r - 1)), halves rounded up.
    start[s] = 1 + (2 * s * (n - width) + (r - 1)) / (2 * (r - 1));
  }
  for (int s = 0; s < r; ++s) {
    auto& subset = plan.groups[s].voltage_subset;
    subset.resize(static_cast<std::size_t>(width));
    for (int k = 0; k < width; ++k) subset[k] = start[s] + k;
  }

  std::vector<int> nodes(ev_nodes.begin(), ev_nodes.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const auto peaks = column_peaks(peak_preserved);
  for (int node : nodes) {
    if (node < 1 || node > n) throw ValidationError("EV node " + std::to_string(node) + " is unknown");
    const int column = node - 1;
    const int anchor = peaks[column] != 0 ? peaks[column] : node;
    int chosen = -1;
    double best_kept = 0.0;
    double best_mass = 0.0;
    for (int s = 0; s < r; ++s) {
      if (anchor < start[s] || anchor >= start[s] + width) continue;
      double kept = 0.0;
      double mass = 0.0;
      for (int k = start[s]; k < start[s] + width; ++k) {
        kept += std::max(commonly_reduced(k - 1, column), 0.0);
        mass += peak_preserved(k - 1, column);
      }
      if (chosen < 0 || kept > best_kept || (kept == best_kept && mass > best_mass)) {
        chosen = s;
        best_kept = kept;
        best_mass = mass;
      }
    }
    plan.groups[chosen].members.push_back(node);
  }

  if (auto issues = validate_plan(plan, n, nodes); !issues.empty()) {
    throw InfeasibleError("proposed grouping is invalid: " + issues.front().message);
  }
  return plan;
}

void write_heatmap_csv(std::ostream& out, const Matrix& matrix) {
  out << "row,col,value\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      out << i + 1 << ',' << j + 1 << ',' << format_number(matrix(i, j)) << '\n';
    }
  }
}

}  // namespace spmds
