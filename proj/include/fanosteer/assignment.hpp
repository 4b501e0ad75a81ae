#pragma once

#include <Eigen/Dense>

#include <vector>

namespace fanosteer {

/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// algorithm with row/column potentials, O(n^3)).
///
/// Returns col_of_row with col_of_row[r] the column matched to row r.
std::vector<int> solve_max_assignment(const Eigen::MatrixXd& weights);

}  // namespace fanosteer
