#pragma once

#include <span>

#include <Eigen/Dense>

namespace spmds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One row per EV, one column per time slot.
using ProfileMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace spmds
