#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library code they check.

#include <cstdint>
#include <random>
#include <vector>

#include "spmds/feeder.hpp"
#include "spmds/solver.hpp"
#include "spmds/types.hpp"

namespace oracle {

using spmds::Line;
using spmds::Matrix;
using spmds::Vector;

/// Random radial tree over nodes 0..n with node labels shuffled, so a child's
/// id may be smaller than its parent's. Impedances are multiples of 1/64.
std::vector<Line> random_tree(int n, std::mt19937_64& rng);

/// Sums, for every pair (i, j), the impedance of each line that appears on
/// both slack-to-i and slack-to-j paths, with paths found by edge search.
Matrix brute_path_sum(int n, const std::vector<Line>& lines, bool reactance);

/// Projection onto {0 <= u <= 1, sum u = c} by enumerating every
/// lower/upper/free split of the coordinates (3^K candidates).
Vector brute_box_sum_projection(const Vector& y, double c);

/// min 0.5 x'Hx + f'x  s.t.  A x = b,  G x <= h, by a log-barrier method
/// started from the strictly feasible x0.
struct QpResult {
  Vector x;
  double objective = 0.0;
  double gap = 0.0;
};
QpResult barrier_qp(const Matrix& H, const Vector& f, const Matrix& A, const Vector& b,
                    const Matrix& G, const Vector& h, Vector x0);

/// Small synthetic instance assembled through the public API.
struct Instance {
  spmds::FeederModel feeder;
  spmds::Problem problem;
};

struct InstanceSpec {
  int nodes = 3;
  int evs = 4;
  int slots = 4;
  int groups = 1;
  int dimension_reduction = 0;
  double ev_power = 6600.0;
  double voltage_floor = 0.954;
  std::uint64_t seed = 1;
  // Attach every EV to the node with the largest self-resistance.
  bool evs_at_far_end = false;
};

Instance make_instance(const InstanceSpec& spec);

/// Valley-filling QP over the full constraint set, solved with `barrier_qp`.
/// Voltage rows are rebuilt from the feeder's lines and load shares. Returns the profiles (EV x slot) and the objective
/// 0.5 ||P_b + sum_i P_i u_i||^2.
struct ValleyOptimum {
  spmds::ProfileMatrix profiles;
  double objective = 0.0;
  bool voltage_active = false;
};
ValleyOptimum solve_valley_qp(const spmds::FeederModel& feeder, const spmds::Problem& problem,
                              double power_factor = 0.98);

}  // namespace oracle
