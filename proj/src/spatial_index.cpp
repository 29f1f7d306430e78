#include "ocd/spatial_index.hpp"

#include "ocd/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace ocd {

SpatialIndex::SpatialIndex(const Matrix& points, int leaf_size)
    : n_points_(points.rows()), dim_(points.cols()) {
  if (n_points_ < 1 || dim_ < 1) throw Error(ErrorCode::EmptyInput, "cannot index an empty matrix");
  if (!all_finite(points)) throw Error(ErrorCode::NonFiniteInput, "points contain NaN or Inf");

  order_.resize(static_cast<std::size_t>(n_points_));
  for (Index i = 0; i < n_points_; ++i) order_[static_cast<std::size_t>(i)] = i;
  nodes_.reserve(static_cast<std::size_t>(2 * n_points_ / std::max(1, leaf_size) + 2));
  build(points, 0, n_points_, std::max(1, leaf_size));

  sorted_.resize(static_cast<std::size_t>(n_points_ * dim_));
  position_.resize(static_cast<std::size_t>(n_points_));
  for (Index pos = 0; pos < n_points_; ++pos) {
    const Index src = order_[static_cast<std::size_t>(pos)];
    position_[static_cast<std::size_t>(src)] = pos;
    std::copy_n(points.data() + src * dim_, dim_, sorted_.data() + pos * dim_);
  }
}

Index SpatialIndex::build(const Matrix& points, Index begin, Index end, int leaf_size) {
  const Index id = static_cast<Index>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1, 0.0});
  centers_.resize(centers_.size() + static_cast<std::size_t>(dim_), 0.0);

  const auto* first = order_.data() + begin;
  const Index count = end - begin;

  double* c = centers_.data() + id * dim_;
  std::vector<double> lo(static_cast<std::size_t>(dim_), INFINITY);
  std::vector<double> hi(static_cast<std::size_t>(dim_), -INFINITY);
  for (Index k = 0; k < count; ++k) {
    const double* p = points.data() + first[k] * dim_;
    for (Index d = 0; d < dim_; ++d) {
      c[d] += p[d];
      lo[static_cast<std::size_t>(d)] = std::min(lo[static_cast<std::size_t>(d)], p[d]);
      hi[static_cast<std::size_t>(d)] = std::max(hi[static_cast<std::size_t>(d)], p[d]);
    }
  }
  for (Index d = 0; d < dim_; ++d) c[d] /= static_cast<double>(count);

  double r2 = 0.0;
  for (Index k = 0; k < count; ++k) {
    r2 = std::max(r2, squared_distance(row(points, first[k]), center(id)));
  }
  nodes_[static_cast<std::size_t>(id)].radius = std::sqrt(r2) * (1.0 + kSlack);

  if (count <= leaf_size) return id;

  Index split_dim = 0;
  for (Index d = 1; d < dim_; ++d) {
    if (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)] >
        hi[static_cast<std::size_t>(split_dim)] - lo[static_cast<std::size_t>(split_dim)]) {
      split_dim = d;
    }
  }
  if (hi[static_cast<std::size_t>(split_dim)] == lo[static_cast<std::size_t>(split_dim)]) {
    return id;  // all points coincide
  }

  const Index mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) {
                     const double va = points(a, split_dim);
                     const double vb = points(b, split_dim);
                     return va < vb || (va == vb && a < b);
                   });
  const Index left = build(points, begin, mid, leaf_size);
  const Index right = build(points, mid, end, leaf_size);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::span<const double> SpatialIndex::point(Index original_row) const {
  if (original_row < 0 || original_row >= n_points_) {
    throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(original_row));
  }
  return sorted_point(position_[static_cast<std::size_t>(original_row)]);
}

std::vector<Index> SpatialIndex::radius_neighbors(Index query_row, double epsilon) const {
  std::vector<Index> out;
  radius_neighbors(query_row, epsilon, out);
  return out;
}

void SpatialIndex::radius_neighbors(Index query_row, double epsilon, std::vector<Index>& out) const {
  if (query_row < 0 || query_row >= n_points_) {
    throw Error(ErrorCode::IndexOutOfRange,
                "query row " + std::to_string(query_row) + " outside [0, " +
                    std::to_string(n_points_) + ")");
  }
  radius_query(point(query_row), epsilon, out);
}

void SpatialIndex::radius_query(std::span<const double> q, double epsilon,
                                std::vector<Index>& out) const {
  out.clear();
  if (!(epsilon >= 0.0)) return;
  const double eps2 = epsilon * epsilon;
  Index stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    const Index id = &node - nodes_.data();
    const double d = std::sqrt(squared_distance(q, center(id)));
    if (d - node.radius > epsilon * (1.0 + kSlack)) continue;
    if (d + node.radius < epsilon * (1.0 - kSlack)) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        out.push_back(order_[static_cast<std::size_t>(pos)]);
      }
      continue;
    }
    if (node.left < 0) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        if (squared_distance(q, sorted_point(pos)) <= eps2) {
          out.push_back(order_[static_cast<std::size_t>(pos)]);
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  std::sort(out.begin(), out.end());
}

Index SpatialIndex::radius_count(std::span<const double> q, double epsilon) const {
  if (!(epsilon >= 0.0)) return 0;
  const double eps2 = epsilon * epsilon;
  Index count = 0;
  Index stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    const Index id = &node - nodes_.data();
    const double d = std::sqrt(squared_distance(q, center(id)));
    if (d - node.radius > epsilon * (1.0 + kSlack)) continue;
    if (d + node.radius < epsilon * (1.0 - kSlack)) {
      count += node.end - node.begin;
      continue;
    }
    if (node.left < 0) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        if (squared_distance(q, sorted_point(pos)) <= eps2) ++count;
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return count;
}

std::vector<std::pair<Index, double>> SpatialIndex::k_nearest(std::span<const double> q,
                                                               Index k) const {
  k = std::clamp<Index>(k, 0, n_points_);
  using Entry = std::pair<double, Index>;  // (squared distance, row); max-heap on the pair
  std::priority_queue<Entry> best;
  if (k == 0) return {};

  auto worst = [&] { return static_cast<Index>(best.size()) < k ? INFINITY : best.top().first; };

  // Depth-first, nearer child first.
  std::vector<Index> stack{0};
  while (!stack.empty()) {
    const Index id = stack.back();
    stack.pop_back();
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const double d = std::sqrt(squared_distance(q, center(id)));
    const double bound = std::max(0.0, d - node.radius);
    if (bound * bound > worst() * (1.0 + kSlack)) continue;
    if (node.left < 0) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        const Entry e{squared_distance(q, sorted_point(pos)), order_[static_cast<std::size_t>(pos)]};
        if (static_cast<Index>(best.size()) < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      continue;
    }
    const double dl = squared_distance(q, center(node.left));
    const double dr = squared_distance(q, center(node.right));
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::vector<std::pair<Index, double>> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.emplace_back(best.top().second, best.top().first);
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace ocd
