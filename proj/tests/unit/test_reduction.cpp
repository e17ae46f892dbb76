#include <algorithm>
#include <random>

#include "doctest.h"

#include "oracles.hpp"
#include "spmds/errors.hpp"
#include "spmds/reduction.hpp"

using namespace spmds;

namespace {

std::vector<int> range(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

bool has_issue(const std::vector<PlanViolation>& found, PlanIssue issue) {
  return std::any_of(found.begin(), found.end(), [&](const auto& v) { return v.issue == issue; });
}

ReductionPlan table_13() {
  ReductionPlan plan;
  plan.dimension_reduction = 5;
  plan.groups = {{range(1, 3), range(1, 7)}, {range(4, 5), range(4, 10)}, {range(6, 12), range(6, 12)}};
  return plan;
}

}  // namespace

TEST_CASE("commonly-reduced matrix subtracts the grand mean") {
  Matrix R(2, 2);
  R << 0.1, 0.1, 0.1, 0.3;
  Matrix expected(2, 2);
  expected << -0.05, -0.05, -0.05, 0.15;
  CHECK((commonly_reduced(R) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(commonly_reduced(Matrix::Constant(3, 3, 0.7)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(commonly_reduced(Matrix::Constant(1, 1, 2.0))(0, 0) == 0.0);
}

TEST_CASE("peak-preserved matrix subtracts column means") {
  Matrix R(2, 2);
  R << 0.1, 0.1, 0.1, 0.3;
  Matrix expected(2, 2);
  expected << 0.0, -0.1, 0.0, 0.1;
  CHECK((peak_preserved(R) - expected).cwiseAbs().maxCoeff() < 1e-15);
  Matrix same_rows(3, 2);
  same_rows << 1, 2, 1, 2, 1, 2;
  CHECK(peak_preserved(same_rows).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reduction properties on random feeders") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const auto lines = oracle::random_tree(n, rng);
    const Matrix R = oracle::brute_path_sum(n, lines, false);
    CHECK(std::abs(commonly_reduced(R).sum()) < 1e-12);
    const Matrix col = peak_preserved(R);
    const auto peaks = column_peaks(col);
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs(col.col(j).sum()) < 1e-12);
      Eigen::Index a = 0;
      Eigen::Index b = 0;
      R.col(j).maxCoeff(&a);
      col.col(j).maxCoeff(&b);
      CHECK(a == b);
      if (peaks[j] != 0) CHECK(peaks[j] == a + 1);
    }
  }
}

TEST_CASE("column peaks take the lower node on ties and 0 without a peak") {
  Matrix col(3, 2);
  col << 0.5, 0.0, 0.5, 0.0, -1.0, 0.0;
  const auto peaks = column_peaks(col);
  CHECK(peaks[0] == 1);
  CHECK(peaks[1] == 0);
}

TEST_CASE("shipped grouping tables validate") {
  CHECK(validate_plan(table_13(), 12).empty());
  ReductionPlan big;
  big.dimension_reduction = 54;
  big.groups = {{range(1, 21), range(1, 68)},
                {range(22, 38), range(22, 89)},
                {range(39, 54), range(39, 106)},
                {range(55, 122), range(55, 122)}};
  CHECK(validate_plan(big, 122).empty());
  CHECK(max_dimension_reduction(12, 3) == 8);
  CHECK(max_dimension_reduction(122, 4) == 91);
  CHECK(max_dimension_reduction(5, 1) == 0);
}

TEST_CASE("plan violations are all reported") {
  auto plan = table_13();
  plan.groups[2].voltage_subset = range(7, 13);
  const auto found = validate_plan(plan, 12);
  CHECK_FALSE(has_issue(found, PlanIssue::kSubsetSize));
  CHECK(has_issue(found, PlanIssue::kSubsetRange));

  auto wrong_size = table_13();
  wrong_size.groups[0].voltage_subset = range(1, 6);
  CHECK(has_issue(validate_plan(wrong_size, 12), PlanIssue::kSubsetSize));

  ReductionPlan uncovered;
  uncovered.dimension_reduction = 6;
  uncovered.groups = {{range(1, 6), range(1, 6)}, {range(7, 12), range(1, 6)}};
  CHECK(has_issue(validate_plan(uncovered, 12), PlanIssue::kCoverage));

  ReductionPlan overlap = table_13();
  overlap.groups[1].members = {3, 4, 5};
  CHECK(has_issue(validate_plan(overlap, 12), PlanIssue::kMemberOverlap));

  ReductionPlan missing = table_13();
  missing.groups[1].members = {4};
  const std::vector<int> ev_nodes = range(1, 12);
  CHECK(has_issue(validate_plan(missing, 12, ev_nodes), PlanIssue::kMemberCoverage));

  ReductionPlan out_of_range = table_13();
  out_of_range.groups[0].members = {0, 1, 2, 3};
  CHECK(has_issue(validate_plan(out_of_range, 12), PlanIssue::kMemberRange));

  ReductionPlan none;
  CHECK(has_issue(validate_plan(none, 12), PlanIssue::kGroupCount));
}

TEST_CASE("dimension bound violation names the bound") {
  ReductionPlan plan;
  plan.dimension_reduction = 7;
  plan.groups = {{range(1, 6), range(1, 5)}, {range(7, 12), range(8, 12)}};
  const auto found = validate_plan(plan, 12);
  REQUIRE(has_issue(found, PlanIssue::kDimensionBound));
  const auto it = std::find_if(found.begin(), found.end(),
                               [](const auto& v) { return v.issue == PlanIssue::kDimensionBound; });
  CHECK(it->message.find("6") != std::string::npos);

  ReductionPlan single;
  single.dimension_reduction = 1;
  single.groups = {{range(1, 3), range(1, 2)}};
  CHECK(has_issue(validate_plan(single, 3), PlanIssue::kDimensionBound));
}

TEST_CASE("proposed groupings satisfy the plan invariants") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 10);
    const int r = 1 + static_cast<int>(rng() % std::min(n, 4));
    const int d = static_cast<int>(rng() % (max_dimension_reduction(n, r) + 1));
    const auto lines = oracle::random_tree(n, rng);
    const Matrix R = oracle::brute_path_sum(n, lines, false);
    std::vector<int> ev_nodes;
    for (int k = 1; k <= n; ++k) {
      if (rng() % 3 != 0) ev_nodes.push_back(k);
    }
    const auto plan = propose_grouping(commonly_reduced(R), peak_preserved(R), r, d, ev_nodes);
    CHECK(plan.group_count() == r);
    CHECK(validate_plan(plan, n, ev_nodes).empty());
  }
}

TEST_CASE("proposal uses evenly spread windows") {
  Matrix R = Matrix::Identity(12, 12);
  const auto plan = propose_grouping(commonly_reduced(R), peak_preserved(R), 3, 5, range(1, 12));
  CHECK(plan.groups[0].voltage_subset == range(1, 7));
  CHECK(plan.groups[1].voltage_subset == range(4, 10));
  CHECK(plan.groups[2].voltage_subset == range(6, 12));
  CHECK_THROWS_AS(propose_grouping(commonly_reduced(R), peak_preserved(R), 3, 9, range(1, 12)),
                  InfeasibleError);
}

TEST_CASE("full-dimension plan is one group over every node") {
  const std::vector<int> ev_nodes = {2, 3};
  const auto plan = full_dimension_plan(4, ev_nodes);
  CHECK(plan.group_count() == 1);
  CHECK(plan.dimension_reduction == 0);
  CHECK(plan.groups[0].voltage_subset == range(1, 4));
  CHECK(validate_plan(plan, 4, ev_nodes).empty());
}
