#include "ocd/exact_ot.hpp"

#include "ocd/error.hpp"

#include <limits>
#include <string>

namespace ocd {

std::vector<Index> solve_assignment(std::span<const double> costs, Index n) {
  if (n < 0 || static_cast<Index>(costs.size()) != n * n) {
    throw Error(ErrorCode::ShapeMismatch, "assignment cost matrix must be n x n");
  }
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto N = static_cast<std::size_t>(n);

  // Row potentials u, column potentials v; column 0 is a virtual source.
  std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0), min_slack(N + 1);
  std::vector<std::size_t> match(N + 1, 0), way(N + 1, 0);
  std::vector<char> used(N + 1);

  for (std::size_t r = 1; r <= N; ++r) {
    match[0] = r;
    std::size_t col = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col] = 1;
      const std::size_t row_i = match[col];
      const double* crow = costs.data() + (row_i - 1) * N;
      double delta = kInf;
      std::size_t next = 0;
      for (std::size_t c = 1; c <= N; ++c) {
        if (used[c]) continue;
        const double reduced = crow[c - 1] - u[row_i] - v[c];
        if (reduced < min_slack[c]) {
          min_slack[c] = reduced;
          way[c] = col;
        }
        if (min_slack[c] < delta) {
          delta = min_slack[c];
          next = c;
        }
      }
      for (std::size_t c = 0; c <= N; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col = next;
    } while (match[col] != 0);
    // Flip the augmenting path back to the source.
    do {
      const std::size_t prev = way[col];
      match[col] = match[prev];
      col = prev;
    } while (col != 0);
  }

  std::vector<Index> assignment(N);
  for (std::size_t c = 1; c <= N; ++c) assignment[match[c] - 1] = static_cast<Index>(c - 1);
  return assignment;
}

DiscreteCoupling emd(const Matrix& x_samples, const Matrix& y_samples, const CostModel& cost) {
  if (x_samples.rows() != y_samples.rows() || x_samples.cols() != y_samples.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "emd needs equal-size sample sets of equal dimension");
  }
  const Index n = x_samples.rows();
  if (n > kMaxAssignmentSize) {
    throw Error(ErrorCode::SizeGuardExceeded,
                std::to_string(n) + " samples exceed the assignment guard of " +
                    std::to_string(kMaxAssignmentSize));
  }
  if (n < 1) throw Error(ErrorCode::EmptyInput, "emd of empty sample sets");
  if (!all_finite(x_samples) || !all_finite(y_samples)) {
    throw Error(ErrorCode::NonFiniteInput, "emd input contains NaN or Inf");
  }

  std::vector<double> costs(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      costs[static_cast<std::size_t>(i * n + j)] = cost.cost(row(x_samples, i), row(y_samples, j));
    }
  }
  DiscreteCoupling out;
  out.assignment = solve_assignment(costs, n);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    total += costs[static_cast<std::size_t>(i * n + out.assignment[static_cast<std::size_t>(i)])];
  }
  out.total_cost = total / static_cast<double>(n);
  return out;
}

double wasserstein2_empirical(const Matrix& x_samples, const Matrix& y_samples) {
  return emd(x_samples, y_samples, l2_cost_model()).total_cost;
}

double joint_distance(const Matrix& pairs_a, const Matrix& pairs_b) {
  if (pairs_a.cols() != pairs_b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "pair sets live in different dimensions");
  }
  if (pairs_a.rows() != pairs_b.rows()) {
    throw Error(ErrorCode::SizeGuardExceeded, "joint distance needs equal pair counts");
  }
  return wasserstein2_empirical(pairs_a, pairs_b);
}

Matrix concat_pairs(const Matrix& x, const Matrix& y, const std::vector<Index>* y_order) {
  if (x.rows() != y.rows()) throw Error(ErrorCode::ShapeMismatch, "pair halves differ in length");
  Matrix out(x.rows(), x.cols() + y.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const Index j = y_order ? (*y_order)[static_cast<std::size_t>(i)] : i;
    out.row(i).head(x.cols()) = x.row(i);
    out.row(i).tail(y.cols()) = y.row(j);
  }
  return out;
}

}  // namespace ocd
