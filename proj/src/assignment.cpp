#include "mslmb/assignment.hpp"

#include <limits>

namespace mslmb {

Assignment solve_assignment(const Matrix& cost) {
  const auto n = static_cast<int>(cost.rows());
  const auto m = static_cast<int>(cost.cols());
  if (n > m) throw DimensionError("solve_assignment: more rows than columns");
  if (!cost.allFinite()) throw std::invalid_argument("solve_assignment: non-finite cost");
  Assignment out;
  out.row_to_col.assign(static_cast<std::size_t>(n), -1);
  if (n == 0) return out;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based with a virtual column 0; owner[j] is the row currently holding column j.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = owner[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= m; ++j) {
    if (owner[j] != 0) out.row_to_col[static_cast<std::size_t>(owner[j] - 1)] = j - 1;
  }
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.row_to_col[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace mslmb
