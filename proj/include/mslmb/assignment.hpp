#pragma once

#include "mslmb/gaussian.hpp"

#include <vector>

namespace mslmb {

struct Assignment {
  std::vector<int> row_to_col;  ///< column matched to each row
  double cost = 0.0;
};

/// Minimum-cost matching of every row to a distinct column (rows <= cols),
/// shortest augmenting paths with potentials, O(rows^2 cols).
Assignment solve_assignment(const Matrix& cost);

}  // namespace mslmb
