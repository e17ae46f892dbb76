#include "spmds/accounting.hpp"

#include <algorithm>
#include <numeric>

#include "spmds/errors.hpp"
#include "spmds/solver.hpp"

namespace spmds {

Ratio Ratio::make(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) return {0, 1};
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  return {numerator / g, denominator / g};
}

__extension__ typedef __int128 Wide;

std::string Ratio::percent(int decimals) const {
  Wide scale = 100;
  for (int k = 0; k < decimals; ++k) scale *= 10;
  const bool negative = numerator < 0;
  const Wide magnitude = negative ? -static_cast<Wide>(numerator) : numerator;
  const Wide rounded = (2 * magnitude * scale + denominator) / (2 * static_cast<Wide>(denominator));
  Wide unit = 1;
  for (int k = 0; k < decimals; ++k) unit *= 10;
  auto whole = static_cast<long long>(rounded / unit);
  auto fraction = static_cast<long long>(rounded % unit);
  std::string out = (negative && rounded != 0 ? "-" : "") + std::to_string(whole);
  if (decimals > 0) {
    auto digits = std::to_string(fraction);
    out += '.' + std::string(static_cast<std::size_t>(decimals) - digits.size(), '0') + digits;
  }
  return out;
}

PrimalSavings flops_primal(int n, int d, int slots) {
  if (n < 0 || d < 0 || d > n || slots < 1) {
    throw ValidationError("primal FLOPS need 0 <= d <= n and K >= 1");
  }
  const std::int64_t k = slots;
  return {2 * d * k * k, Ratio::make(d * k, (n + 2) * k - 1)};
}

DualSavings flops_dual(int n, int d, int slots, int evs, int largest_group) {
  if (n < 0 || d < 0 || d > n || slots < 1 || evs < 0 || largest_group < 0 ||
      largest_group > evs) {
    throw ValidationError("dual FLOPS need 0 <= d <= n, K >= 1 and 0 <= v_m <= v");
  }
  const std::int64_t k = slots;
  const std::int64_t kept = n - d;
  const std::int64_t saved =
      (2 * static_cast<std::int64_t>(evs) * n - 2 * static_cast<std::int64_t>(largest_group) * kept) * k * k -
      k * kept;
  const std::int64_t full = 2 * static_cast<std::int64_t>(evs) * n * k * k;
  return {saved, Ratio::make(saved, full), saved < 0};
}

FlopsReport make_flops_report(int n, int d, int slots, int evs, int largest_group) {
  return {n, d, slots, evs, largest_group, flops_primal(n, d, slots),
          flops_dual(n, d, slots, evs, largest_group)};
}

std::uint64_t OpCounts::dual_critical_path() const noexcept {
  return dual.empty() ? 0 : *std::max_element(dual.begin(), dual.end());
}

std::uint64_t OpCounts::dual_total() const noexcept {
  return std::accumulate(dual.begin(), dual.end(), std::uint64_t{0});
}

OpCounts& OpCounts::operator+=(const OpCounts& other) {
  primal += other.primal;
  weighting += other.weighting;
  if (dual.size() < other.dual.size()) dual.resize(other.dual.size(), 0);
  for (std::size_t s = 0; s < other.dual.size(); ++s) dual[s] += other.dual[s];
  return *this;
}

EmpiricalCounts empirical_counters(const RunReport& run) {
  const auto& ops = run.counters;
  if (ops.iterations == 0) return {};
  const double iterations = ops.iterations;
  EmpiricalCounts out;
  out.primal_per_ev = ops.evs > 0 ? static_cast<double>(ops.primal) / (iterations * ops.evs) : 0.0;
  out.dual_critical_path = static_cast<double>(ops.dual_critical_path()) / iterations;
  out.dual_total = static_cast<double>(ops.dual_total()) / iterations;
  out.weighting = static_cast<double>(ops.weighting) / iterations;
  return out;
}

MeasuredSavings compare_counters(const RunReport& full, const RunReport& reduced) {
  const auto a = empirical_counters(full);
  const auto b = empirical_counters(reduced);
  MeasuredSavings out;
  out.primal_saved = a.primal_per_ev - b.primal_per_ev;
  out.primal_ratio = a.primal_per_ev > 0.0 ? out.primal_saved / a.primal_per_ev : 0.0;
  out.dual_saved = a.dual_critical_path - b.dual_critical_path;
  out.dual_ratio = a.dual_critical_path > 0.0 ? out.dual_saved / a.dual_critical_path : 0.0;
  out.formula = reduced.flops;
  const auto formula_primal = static_cast<double>(out.formula.primal.saved);
  const auto formula_dual = static_cast<double>(out.formula.dual.saved);
  out.primal_agreement = formula_primal != 0.0 ? out.primal_saved / formula_primal : 0.0;
  out.dual_agreement = formula_dual != 0.0 ? out.dual_saved / formula_dual : 0.0;
  return out;
}

}  // namespace spmds
