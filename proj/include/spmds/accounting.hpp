#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spmds {

/// Exact fraction, kept in lowest terms with a positive denominator.
struct Ratio {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  static Ratio make(std::int64_t numerator, std::int64_t denominator);
  double value() const noexcept { return static_cast<double>(numerator) / denominator; }
  /// Percentage rounded half away from zero, e.g. "35.76".
  std::string percent(int decimals = 2) const;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct PrimalSavings {
  std::int64_t saved = 0;  // F_pt, per EV per primal gradient
  Ratio ratio;             // F_pr
};

struct DualSavings {
  std::int64_t saved = 0;  // F_dt, per dual gradient round
  Ratio ratio;             // F_dr
  /// The closed form went negative (degenerate inputs such as d = 0 with one
  /// group); the values are reported unchanged.
  bool negative = false;
};

/// F_pt = 2 d K^2 and F_pr = d K / ((n + 2) K - 1).
PrimalSavings flops_primal(int n, int d, int slots);

/// F_dt = (2 v n - 2 v_m (n - d)) K^2 - K (n - d) and F_dr = F_dt / (2 v n K^2).
DualSavings flops_dual(int n, int d, int slots, int evs, int largest_group);

struct FlopsReport {
  int n = 0;
  int d = 0;
  int slots = 0;
  int evs = 0;
  int largest_group = 0;
  PrimalSavings primal;
  DualSavings dual;
};

FlopsReport make_flops_report(int n, int d, int slots, int evs, int largest_group);

/// Floating-point operations executed by the solver, split by phase. A fused
/// multiply-add counts as two.
struct OpCounts {
  int iterations = 0;
  int evs = 0;
  std::uint64_t primal = 0;             // all EVs' primal gradients
  std::vector<std::uint64_t> dual;      // dual gradient, one entry per group
  std::uint64_t weighting = 0;          // omega, lambda_e and aggregate load

  std::uint64_t dual_critical_path() const noexcept;
  std::uint64_t dual_total() const noexcept;
  OpCounts& operator+=(const OpCounts& other);
};

struct RunReport;

/// Per-iteration averages of a run's counters.
struct EmpiricalCounts {
  double primal_per_ev = 0.0;
  double dual_critical_path = 0.0;
  double dual_total = 0.0;
  double weighting = 0.0;
};

EmpiricalCounts empirical_counters(const RunReport& run);

/// Measured savings of `reduced` against the full-dimension `full` run,
/// alongside the closed-form values for the reduced run's dimensions.
struct MeasuredSavings {
  double primal_saved = 0.0;
  double primal_ratio = 0.0;
  double dual_saved = 0.0;
  double dual_ratio = 0.0;
  FlopsReport formula;
  /// measured / formula; 1 means the counters reproduce the closed form.
  double primal_agreement = 0.0;
  double dual_agreement = 0.0;
};

MeasuredSavings compare_counters(const RunReport& full, const RunReport& reduced);

}  // namespace spmds
