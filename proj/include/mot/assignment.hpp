#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mot {

// Cost at or above this marks a pair that must not be matched.
constexpr double kUnmatchableCost = 1e9;

// Minimum-cost one-to-one assignment over a (possibly rectangular) cost
// matrix. Returns one column index per row, -1 when the row stays unmatched.
// Pairs with cost >= kUnmatchableCost / 2 are never reported as matches.
std::vector<int> solve_assignment_optimal(const Eigen::MatrixXd& cost);

// Greedy alternative: repeatedly takes the cheapest remaining pair.
// Deterministic tie-break by (row, column).
std::vector<int> solve_assignment_greedy(const Eigen::MatrixXd& cost);

}  // namespace mot
