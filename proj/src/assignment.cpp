#include "dslga/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dslga/errors.hpp"

namespace dslga {

namespace {

// Shortest augmenting path over the reduced-cost graph. Requires
// rows <= cols. Fills col4row (size rows) with the matched column of
// each row. Dual potentials u, v keep reduced costs nonnegative.
void solve_lap(const Eigen::MatrixXd& cost, std::vector<int>& col4row) {
  const int n_rows = static_cast<int>(cost.rows());
  const int n_cols = static_cast<int>(cost.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(static_cast<std::size_t>(n_rows), 0.0);
  std::vector<double> v(static_cast<std::size_t>(n_cols), 0.0);
  std::vector<int> row4col(static_cast<std::size_t>(n_cols), -1);
  col4row.assign(static_cast<std::size_t>(n_rows), -1);

  std::vector<double> shortest(static_cast<std::size_t>(n_cols));
  std::vector<int> path(static_cast<std::size_t>(n_cols));
  std::vector<bool> in_sr(static_cast<std::size_t>(n_rows));
  std::vector<bool> in_sc(static_cast<std::size_t>(n_cols));
  std::vector<int> remaining(static_cast<std::size_t>(n_cols));

  for (int cur_row = 0; cur_row < n_rows; ++cur_row) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(path.begin(), path.end(), -1);
    std::fill(in_sr.begin(), in_sr.end(), false);
    std::fill(in_sc.begin(), in_sc.end(), false);
    int num_remaining = n_cols;
    for (int j = 0; j < n_cols; ++j) {
      // reverse fill: on all-tie scans the lowest free column wins,
      // so a constant matrix solves to the identity matching
      remaining[static_cast<std::size_t>(j)] = n_cols - 1 - j;
    }

    double min_val = 0.0;
    int i = cur_row;
    int sink = -1;
    while (sink == -1) {
      in_sr[static_cast<std::size_t>(i)] = true;
      int index = -1;
      double lowest = kInf;
      for (int it = 0; it < num_remaining; ++it) {
        const int j = remaining[static_cast<std::size_t>(it)];
        const double r = min_val + cost(i, j) - u[static_cast<std::size_t>(i)] -
                         v[static_cast<std::size_t>(j)];
        if (r < shortest[static_cast<std::size_t>(j)]) {
          path[static_cast<std::size_t>(j)] = i;
          shortest[static_cast<std::size_t>(j)] = r;
        }
        if (shortest[static_cast<std::size_t>(j)] < lowest ||
            (shortest[static_cast<std::size_t>(j)] == lowest &&
             row4col[static_cast<std::size_t>(j)] == -1)) {
          lowest = shortest[static_cast<std::size_t>(j)];
          index = it;
        }
      }
      min_val = lowest;
      const int j = remaining[static_cast<std::size_t>(index)];
      if (row4col[static_cast<std::size_t>(j)] == -1) {
        sink = j;
      } else {
        i = row4col[static_cast<std::size_t>(j)];
      }
      in_sc[static_cast<std::size_t>(j)] = true;
      remaining[static_cast<std::size_t>(index)] =
          remaining[static_cast<std::size_t>(--num_remaining)];
    }

    u[static_cast<std::size_t>(cur_row)] += min_val;
    for (int r = 0; r < n_rows; ++r) {
      if (in_sr[static_cast<std::size_t>(r)] && r != cur_row) {
        u[static_cast<std::size_t>(r)] +=
            min_val -
            shortest[static_cast<std::size_t>(col4row[static_cast<std::size_t>(r)])];
      }
    }
    for (int j = 0; j < n_cols; ++j) {
      if (in_sc[static_cast<std::size_t>(j)]) {
        v[static_cast<std::size_t>(j)] -=
            min_val - shortest[static_cast<std::size_t>(j)];
      }
    }

    // augment along the recorded path
    int j = sink;
    while (true) {
      const int r = path[static_cast<std::size_t>(j)];
      row4col[static_cast<std::size_t>(j)] = r;
      std::swap(col4row[static_cast<std::size_t>(r)], j);
      if (r == cur_row) break;
    }
  }
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
  const int n_rows = static_cast<int>(cost.rows());
  const int n_cols = static_cast<int>(cost.cols());
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_cols; ++j) {
      if (!std::isfinite(cost(i, j))) {
        throw CostMatrixError("non-finite cost at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }

  Assignment out;
  if (n_rows == 0 || n_cols == 0) {
    for (int i = 0; i < n_rows; ++i) out.unmatched_visible.push_back(i);
    for (int j = 0; j < n_cols; ++j) out.unmatched_infrared.push_back(j);
    return out;
  }

  std::vector<int> col4row;
  if (n_rows <= n_cols) {
    solve_lap(cost, col4row);
    for (int i = 0; i < n_rows; ++i) {
      out.pairs.emplace_back(i, col4row[static_cast<std::size_t>(i)]);
    }
  } else {
    solve_lap(cost.transpose(), col4row);
    for (int j = 0; j < n_cols; ++j) {
      out.pairs.emplace_back(col4row[static_cast<std::size_t>(j)], j);
    }
    std::sort(out.pairs.begin(), out.pairs.end());
  }

  std::vector<bool> row_used(static_cast<std::size_t>(n_rows), false);
  std::vector<bool> col_used(static_cast<std::size_t>(n_cols), false);
  for (const auto& [r, c] : out.pairs) {
    out.total_cost += cost(r, c);
    row_used[static_cast<std::size_t>(r)] = true;
    col_used[static_cast<std::size_t>(c)] = true;
  }
  for (int i = 0; i < n_rows; ++i) {
    if (!row_used[static_cast<std::size_t>(i)]) out.unmatched_visible.push_back(i);
  }
  for (int j = 0; j < n_cols; ++j) {
    if (!col_used[static_cast<std::size_t>(j)]) out.unmatched_infrared.push_back(j);
  }
  return out;
}

}  // namespace dslga
