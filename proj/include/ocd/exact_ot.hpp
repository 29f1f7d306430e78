#pragma once

#include "ocd/cost.hpp"
#include "ocd/types.hpp"

#include <vector>

namespace ocd {

/// Largest sample count the dense assignment solver accepts.
inline constexpr Index kMaxAssignmentSize = 5000;

/// Optimal pairing between two equal-size, uniformly weighted sample sets.
/// x row i is sent to y row assignment[i]; total_cost is the mean cost.
struct DiscreteCoupling {
  std::vector<Index> assignment;
  double total_cost = 0.0;
};

/// Solves the dense linear assignment problem for an N x N cost matrix
/// (row-major, N*N entries) with shortest augmenting paths and dual
/// potentials. Returns the column assigned to each row.
std::vector<Index> solve_assignment(std::span<const double> costs, Index n);

/// Exact optimal transport between the empirical measures of x and y.
/// Throws ShapeMismatch for unequal shapes and SizeGuardExceeded above
/// kMaxAssignmentSize samples.
DiscreteCoupling emd(const Matrix& x_samples, const Matrix& y_samples, const CostModel& cost);

/// Squared 2-Wasserstein distance between the two empirical measures.
double wasserstein2_empirical(const Matrix& x_samples, const Matrix& y_samples);

/// Squared 2-Wasserstein distance between two discrete joints, each row an
/// (x, y) pair concatenated into R^{2n}. Throws DimensionMismatch if the
/// column counts differ and SizeGuardExceeded if the row counts differ.
double joint_distance(const Matrix& pairs_a, const Matrix& pairs_b);

/// Concatenates x and y (optionally with y rows permuted) into pair rows.
Matrix concat_pairs(const Matrix& x, const Matrix& y, const std::vector<Index>* y_order = nullptr);

}  // namespace ocd
