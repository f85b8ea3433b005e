#include "mot/assignment.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace mot {

std::vector<int> solve_assignment_optimal(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  const int n = std::max(rows, cols);
  if (n == 0) return {};

  // Pad to square with a constant; dummy pairings cost the same wherever they
  // land, so the real rows' optimum is unaffected.
  auto at = [&](int i, int j) -> double {
    return (i < rows && j < cols) ? cost(i, j) : 0.0;
  };

  // Shortest-augmenting-path assignment with potentials (1-indexed arrays).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= rows && j <= cols &&
        cost(i - 1, j - 1) < 0.5 * kUnmatchableCost) {
      row_to_col[i - 1] = j - 1;
    }
  }
  return row_to_col;
}

std::vector<int> solve_assignment_greedy(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  std::vector<std::tuple<double, int, int>> pairs;
  pairs.reserve(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (cost(i, j) < 0.5 * kUnmatchableCost) pairs.emplace_back(cost(i, j), i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> row_to_col(rows, -1);
  std::vector<char> col_taken(cols, 0);
  for (const auto& [c, i, j] : pairs) {
    (void)c;
    if (row_to_col[i] == -1 && !col_taken[j]) {
      row_to_col[i] = j;
      col_taken[j] = 1;
    }
  }
  return row_to_col;
}

}  // namespace mot
