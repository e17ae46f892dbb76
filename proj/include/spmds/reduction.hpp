#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spmds/types.hpp"

namespace spmds {

/// R minus its grand-sum mean. Entries that stay positive have above-average
/// voltage impact.
Matrix commonly_reduced(const Matrix& resistance);

/// R minus each column's mean. Every column sums to zero and keeps the row
/// of its maximum.
Matrix peak_preserved(const Matrix& resistance);

/// For each column of a peak-preserved matrix, the node (1-based) holding the
/// strictly positive column maximum, lowest node on ties; 0 when the column
/// has no positive entry.
std::vector<int> column_peaks(const Matrix& peak_preserved);

/// An EV group: the nodes whose EVs it collects and the nodes whose voltage
/// it monitors. Both use 1-based node ids; `voltage_subset` order defines the
/// row order of the group's reduced vectors.
struct Group {
  std::vector<int> members;
  std::vector<int> voltage_subset;
};

struct ReductionPlan {
  int dimension_reduction = 0;
  std::vector<Group> groups;
  // Filled when the plan was proposed from the feeder matrices.
  Matrix commonly_reduced;
  Matrix peak_preserved;

  int group_count() const noexcept { return static_cast<int>(groups.size()); }
};

/// Single group over every node with no reduction: the full-dimension layout.
ReductionPlan full_dimension_plan(int node_count, std::span<const int> ev_nodes);

/// Largest d with d <= n (1 - 1/r).
int max_dimension_reduction(int node_count, int group_count);

enum class PlanIssue {
  kGroupCount,
  kDimensionBound,
  kSubsetSize,
  kSubsetRange,
  kCoverage,
  kMemberRange,
  kMemberOverlap,
  kMemberCoverage,
};

struct PlanViolation {
  PlanIssue issue;
  std::string message;
};

/// Every constraint the plan breaks; an empty list means the plan is usable.
/// Member coverage is only checked against `ev_nodes` when it is non-empty.
std::vector<PlanViolation> validate_plan(const ReductionPlan& plan, int node_count,
                                         std::span<const int> ev_nodes = {});

/// Builds a plan with r contiguous voltage windows of n - d nodes spread
/// evenly over 1..n (first at node 1, last ending at node n). Each EV node
/// joins a window holding its column peak; when several do, the window that
/// keeps the most positive commonly-reduced mass of that column wins, then the
/// larger peak-preserved mass, then the lower group.
/// Throws InfeasibleError when d breaks the bound for r.
ReductionPlan propose_grouping(const Matrix& commonly_reduced, const Matrix& peak_preserved,
                               int group_count, int dimension_reduction,
                               std::span<const int> ev_nodes);

/// Heatmap triples `row,col,value` with 1-based node ids.
void write_heatmap_csv(std::ostream& out, const Matrix& matrix);

}  // namespace spmds
