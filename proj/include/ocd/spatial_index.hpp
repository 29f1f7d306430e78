#pragma once

#include "ocd/types.hpp"

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace ocd {

/// Ball tree over the rows of a sample matrix.
///
/// Radius queries return exactly the closed-ball set
/// { j : |p_q - p_j|^2 <= eps^2 }, with the squared distance accumulated
/// coordinate by coordinate in index order. Node pruning is conservative, so
/// the tree never changes the answer relative to a brute-force scan that uses
/// the same predicate.
///
/// The index keeps its own reordered copy of the points and stays valid after
/// the source matrix changes, but then describes the old positions.
class SpatialIndex {
 public:
  /// Throws EmptyInput for a matrix without rows and NonFiniteInput for
  /// NaN/Inf entries. leaf_size < 1 is treated as 1.
  SpatialIndex(const Matrix& points, int leaf_size = 16);

  Index size() const noexcept { return n_points_; }
  Index dim() const noexcept { return dim_; }

  /// Sorted neighbor indices of stored row `query_row` (always includes it).
  /// Throws IndexOutOfRange for an invalid row.
  std::vector<Index> radius_neighbors(Index query_row, double epsilon) const;

  /// Same as above, reusing `out` to avoid allocation in hot loops.
  void radius_neighbors(Index query_row, double epsilon, std::vector<Index>& out) const;

  /// Neighbors of an arbitrary point; `out` is sorted ascending.
  void radius_query(std::span<const double> point, double epsilon, std::vector<Index>& out) const;

  /// Number of points within the closed ball (no list materialized).
  Index radius_count(std::span<const double> point, double epsilon) const;

  /// The k nearest rows of an arbitrary point as (index, squared distance),
  /// ordered by distance then index. k is clamped to size().
  std::vector<std::pair<Index, double>> k_nearest(std::span<const double> point, Index k) const;

  std::span<const double> point(Index original_row) const;

  /// Calls visit(row) for every row in the closed ball, in tree order (a
  /// fixed order for a given index, but not ascending).
  template <class Visit>
  void visit_radius(std::span<const double> q, double epsilon, Visit&& visit) const;

  /// Like visit_radius, but subtrees lying entirely inside the ball are
  /// reported as a whole through on_node(node_id) instead of row by row;
  /// remaining rows go through on_row(row).
  template <class OnNode, class OnRow>
  void visit_radius_blocks(std::span<const double> q, double epsilon, OnNode&& on_node,
                           OnRow&& on_row) const;

  /// Tree layout: node 0 is the root, children have larger ids than their
  /// parent, and node `id` covers tree positions [node_begin, node_end).
  Index node_count() const noexcept { return static_cast<Index>(nodes_.size()); }
  Index node_begin(Index id) const { return nodes_[static_cast<std::size_t>(id)].begin; }
  Index node_end(Index id) const { return nodes_[static_cast<std::size_t>(id)].end; }
  Index node_left(Index id) const { return nodes_[static_cast<std::size_t>(id)].left; }
  Index node_right(Index id) const { return nodes_[static_cast<std::size_t>(id)].right; }

  /// Original rows in tree order. Queries issued in this order touch nearby
  /// memory consecutively.
  std::span<const Index> tree_order() const noexcept { return order_; }

 private:
  // Relative slack on node-level bounds. Node tests only decide whether a
  // subtree is scanned; every reported point passes the exact predicate.
  static constexpr double kSlack = 1e-9;

  struct Node {
    Index begin = 0;  // range in order_
    Index end = 0;
    Index left = -1;
    Index right = -1;
    double radius = 0.0;
  };

  Index build(const Matrix& points, Index begin, Index end, int leaf_size);
  template <int Dim, class OnNode, class OnRow>
  void blocks_impl(const double* q, double epsilon, OnNode& on_node, OnRow& on_row) const;
  std::span<const double> center(Index node) const {
    return {centers_.data() + node * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> sorted_point(Index pos) const {
    return {sorted_.data() + pos * dim_, static_cast<std::size_t>(dim_)};
  }

  Index n_points_ = 0;
  Index dim_ = 0;
  std::vector<Index> order_;     // tree position -> original row
  std::vector<Index> position_;  // original row -> tree position
  std::vector<double> sorted_;   // points in tree order
  std::vector<double> centers_;
  std::vector<Node> nodes_;
};

template <class Visit>
void SpatialIndex::visit_radius(std::span<const double> q, double epsilon, Visit&& visit) const {
  visit_radius_blocks(
      q, epsilon,
      [&](Index id) {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        for (Index pos = node.begin; pos < node.end; ++pos) visit(order_[static_cast<std::size_t>(pos)]);
      },
      visit);
}

template <class OnNode, class OnRow>
void SpatialIndex::visit_radius_blocks(std::span<const double> q, double epsilon, OnNode&& on_node,
                                       OnRow&& on_row) const {
  switch (dim_) {
    case 1: return blocks_impl<1>(q.data(), epsilon, on_node, on_row);
    case 2: return blocks_impl<2>(q.data(), epsilon, on_node, on_row);
    case 3: return blocks_impl<3>(q.data(), epsilon, on_node, on_row);
    default: return blocks_impl<0>(q.data(), epsilon, on_node, on_row);
  }
}

template <int Dim, class OnNode, class OnRow>
void SpatialIndex::blocks_impl(const double* q, double epsilon, OnNode& on_node,
                               OnRow& on_row) const {
  if (!(epsilon >= 0.0)) return;
  // Same accumulation order as squared_distance, so the predicate is
  // bit-for-bit the brute-force one.
  auto sqdist = [this](const double* a, const double* b) {
    const Index n = Dim > 0 ? Dim : dim_;
    double s = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return s;
  };
  const double eps2 = epsilon * epsilon;
  Index stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Index id = stack[--top];
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const double d = std::sqrt(sqdist(q, centers_.data() + id * dim_));
    if (d - node.radius > epsilon * (1.0 + kSlack)) continue;
    if (d + node.radius < epsilon * (1.0 - kSlack)) {
      on_node(id);
      continue;
    }
    if (node.left < 0) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        if (sqdist(q, sorted_.data() + pos * dim_) <= eps2) on_row(order_[static_cast<std::size_t>(pos)]);
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
}

}  // namespace ocd
