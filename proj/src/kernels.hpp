#pragma once

// Gradient kernels shared by the reduced and full-dimension iterations. Every
// kernel adds the floating-point operations it executes to `flops`.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include "spmds/solver.hpp"

namespace spmds::detail {

/// P_i * load + drop_rows(:, ev)^T dual, where `dual` is aligned with the
/// rows of `drop_rows`.
Vector primal_kernel(int ev, double power, const Vector& load, const Matrix& drop_rows,
                     const Matrix& dual, KernelMode mode, std::uint64_t& flops);

/// start + sum over `evs` of drop_rows(:, i) u_i^T. When `weights` is
/// non-null the start term is weights .* floor_rows, otherwise floor_rows.
Matrix dual_kernel(const Matrix* weights, const Matrix& floor_rows, std::span<const int> evs,
                   const Matrix& drop_rows, const ProfileMatrix& profiles, KernelMode mode,
                   std::uint64_t& flops);

Matrix gather_rows(const Matrix& source, std::span<const int> nodes);

std::vector<int> all_evs(int count);

/// Monitoring data for one iterate: objective, aggregate load, min voltage.
struct Snapshot {
  double objective = 0.0;
  double min_voltage_pu = 0.0;
};

Snapshot snapshot(const Problem& problem, const ProfileMatrix& profiles, const Vector& powers);

Matrix voltage_pu(const Problem& problem, const ProfileMatrix& profiles);

/// True when epsilon has grown more than tenfold over the last 50 iterations
/// or stopped being finite.
bool diverging(const Trace& trace, double tolerance);

void finish_report(RunReport& report, const Problem& problem, const Vector& powers);

int resolve_threads(int requested);

/// Runs fn(index, worker) for index in [0, count) on `workers` threads with a
/// static partition.
template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (int k = 0; k < count; ++k) fn(k, 0);
    return;
  }
  workers = std::min(workers, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
      pool.emplace_back([&fn, &errors, begin, end, w] {
        try {
          for (int k = begin; k < end; ++k) fn(k, w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace spmds::detail
