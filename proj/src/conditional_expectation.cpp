#include "ocd/conditional_expectation.hpp"

#include "ocd/error.hpp"
#include "ocd/parallel.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace ocd {

namespace {

void check_inputs(const ParticleEnsemble& ensemble, const SpatialIndex& idx_x,
                  const SpatialIndex& idx_y) {
  if (idx_x.size() != ensemble.size() || idx_y.size() != ensemble.size() ||
      idx_x.dim() != ensemble.dim() || idx_y.dim() != ensemble.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "spatial indexes do not match the ensemble");
  }
}

void check_finite(const EstimateBatch& batch) {
  if (!all_finite(batch.k_x) || !all_finite(batch.k_y)) {
    throw Error(ErrorCode::NonFiniteResult, "conditional expectation estimate is not finite");
  }
}

// Gradients evaluated on the diagonal pairs (X_j, Y_j).
Matrix diagonal_gradients(const ParticleEnsemble& ensemble, const CostModel& cost, bool wrt_x,
                          int threads) {
  Matrix g(ensemble.size(), ensemble.dim());
  parallel_for(ensemble.size(), threads, [&](Index begin, Index end) {
    for (Index j = begin; j < end; ++j) {
      if (wrt_x) {
        cost.grad_x(row(ensemble.x(), j), row(ensemble.y(), j), row(g, j));
      } else {
        cost.grad_y(row(ensemble.x(), j), row(ensemble.y(), j), row(g, j));
      }
    }
  });
  return g;
}

// Centered moments of (p, g) pairs over a group of particles: count, means,
// and the co-moment sums M_pp = sum (p - mean_p)(p - mean_p)^T and
// M_pg = sum (p - mean_p)(g - mean_g)^T. Groups merge exactly with the
// pairwise update of Chan et al., which stays accurate for tight clusters far
// from the origin. Dim > 0 fixes the dimension at compile time.
template <int Dim>
class Moments {
 public:
  explicit Moments(Index n)
      : n_(Dim > 0 ? Dim : n), data_(static_cast<std::size_t>(1 + 2 * n_ + 2 * n_ * n_), 0.0),
        delta_(static_cast<std::size_t>(2 * n_)) {}

  void clear() { std::fill(data_.begin(), data_.end(), 0.0); }
  double count() const { return data_[0]; }
  const double* mean_p() const { return data_.data() + 1; }
  const double* mean_g() const { return data_.data() + 1 + n(); }
  const double* m_pp() const { return data_.data() + 1 + 2 * n(); }
  const double* m_pg() const { return data_.data() + 1 + 2 * n() + n() * n(); }

  void add_point(const double* p, const double* g) { merge<false>(1.0, p, g, nullptr, nullptr); }
  void add(const Moments& o) { merge<true>(o.count(), o.mean_p(), o.mean_g(), o.m_pp(), o.m_pg()); }

 private:
  Index n() const { return Dim > 0 ? Dim : n_; }

  template <bool WithSums>
  void merge(double nb, const double* mp_b, const double* mg_b, const double* mpp_b,
             const double* mpg_b) {
    const Index n = this->n();
    double* d = data_.data();
    double* mp = d + 1;
    double* mg = d + 1 + n;
    double* mpp = d + 1 + 2 * n;
    double* mpg = mpp + n * n;
    const double na = d[0];
    if (na == 0.0) {
      d[0] = nb;
      std::copy_n(mp_b, n, mp);
      std::copy_n(mg_b, n, mg);
      if constexpr (WithSums) {
        std::copy_n(mpp_b, n * n, mpp);
        std::copy_n(mpg_b, n * n, mpg);
      }
      return;
    }
    const double total = na + nb;
    const double f = na * nb / total;
    const double w = nb / total;
    double* dp = delta_.data();
    double* dg = dp + n;
    for (Index a = 0; a < n; ++a) {
      dp[a] = mp_b[a] - mp[a];
      dg[a] = mg_b[a] - mg[a];
    }
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        mpp[a * n + b] += f * dp[a] * dp[b];
        mpg[a * n + b] += f * dp[a] * dg[b];
        if constexpr (WithSums) {
          mpp[a * n + b] += mpp_b[a * n + b];
          mpg[a * n + b] += mpg_b[a * n + b];
        }
      }
      mp[a] += w * dp[a];
      mg[a] += w * dg[a];
    }
    d[0] = total;
  }

  Index n_;
  std::vector<double> data_;
  std::vector<double> delta_;
};

// Per-node moments of (predictor, response) for every subtree of `index`,
// filled bottom-up so a radius query can absorb whole subtrees at once.
template <int Dim>
std::vector<Moments<Dim>> subtree_moments(const SpatialIndex& index, const Matrix& predictor,
                                          const Matrix& response) {
  const Index n = predictor.cols();
  const auto order = index.tree_order();
  std::vector<Moments<Dim>> nodes(static_cast<std::size_t>(index.node_count()), Moments<Dim>(n));
  for (Index id = index.node_count() - 1; id >= 0; --id) {
    Moments<Dim>& m = nodes[static_cast<std::size_t>(id)];
    if (index.node_left(id) < 0) {
      for (Index pos = index.node_begin(id); pos < index.node_end(id); ++pos) {
        const Index j = order[static_cast<std::size_t>(pos)];
        m.add_point(predictor.data() + j * n, response.data() + j * n);
      }
    } else {
      m.add(nodes[static_cast<std::size_t>(index.node_left(id))]);
      m.add(nodes[static_cast<std::size_t>(index.node_right(id))]);
    }
  }
  return nodes;
}

// Scratch space for one regression; sized once per worker.
template <int Dim>
struct RegressionWorkspace {
  explicit RegressionWorkspace(Index n)
      : moments(n), s_pp(n, n), system(n, n), rhs(n), solution(n), llt(n) {}
  Moments<Dim> moments;
  SquareMatrix s_pp, system;
  Vector rhs, solution;
  Eigen::LLT<SquareMatrix> llt;
};

// Local linear fit of `response` on `predictor` over the predictor-space
// neighbors of row i, evaluated at row i. Writes the fitted response into
// `out`.
template <int Dim>
void local_linear_fit(const Matrix& predictor, const Matrix& response, const SpatialIndex& index,
                      const std::vector<Moments<Dim>>& nodes, Index i, double epsilon,
                      double epsilon_hat, RegressionWorkspace<Dim>& ws, std::span<double> out) {
  const Index n = predictor.cols();
  Moments<Dim>& m = ws.moments;
  m.clear();
  index.visit_radius_blocks(
      row(predictor, i), epsilon, [&](Index id) { m.add(nodes[static_cast<std::size_t>(id)]); },
      [&](Index j) { m.add_point(predictor.data() + j * n, response.data() + j * n); });

  const double inv = 1.0 / m.count();
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) ws.s_pp(a, b) = m.m_pp()[a * n + b] * inv;
    ws.rhs[a] = predictor(i, a) - m.mean_p()[a];
  }

  auto solve = [&](double ridge) {
    ws.system = ws.s_pp;
    ws.system.diagonal().array() += ridge;
    ws.llt.compute(ws.system);
    if (ws.llt.info() != Eigen::Success || !(ws.llt.rcond() >= 1e-12)) return false;
    ws.solution = ws.llt.solve(ws.rhs);
    return true;
  };

  if (!solve(epsilon_hat)) {
    const double fallback = epsilon_hat + 1e-8 * ws.s_pp.trace() / static_cast<double>(n) + 1e-12;
    if (!solve(fallback)) {
      throw Error(ErrorCode::SingularSystem,
                  "regularized cluster covariance is singular at particle " + std::to_string(i));
    }
  }

  for (Index b = 0; b < n; ++b) {
    double v = m.mean_g()[b];
    for (Index a = 0; a < n; ++a) v += m.m_pg()[a * n + b] * inv * ws.solution[a];
    out[static_cast<std::size_t>(b)] = v;
  }
}

template <int Dim>
void fit_all(const Matrix& predictor, const Matrix& response, const SpatialIndex& index,
             double epsilon, double epsilon_hat, int threads, Matrix& out) {
  const auto order = index.tree_order();
  const auto nodes = subtree_moments<Dim>(index, predictor, response);
  parallel_for(predictor.rows(), threads, [&](Index begin, Index end) {
    RegressionWorkspace<Dim> ws(predictor.cols());
    for (Index k = begin; k < end; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      local_linear_fit<Dim>(predictor, response, index, nodes, i, epsilon, epsilon_hat, ws,
                            row(out, i));
    }
  });
}

void fit_all_dispatch(const Matrix& predictor, const Matrix& response, const SpatialIndex& index,
                      double epsilon, double epsilon_hat, int threads, Matrix& out) {
  switch (predictor.cols()) {
    case 1: return fit_all<1>(predictor, response, index, epsilon, epsilon_hat, threads, out);
    case 2: return fit_all<2>(predictor, response, index, epsilon, epsilon_hat, threads, out);
    case 3: return fit_all<3>(predictor, response, index, epsilon, epsilon_hat, threads, out);
    default: return fit_all<0>(predictor, response, index, epsilon, epsilon_hat, threads, out);
  }
}

}  // namespace

EstimateBatch estimate_piecewise_constant(const ParticleEnsemble& ensemble, const CostModel& cost,
                                          const SpatialIndex& idx_x, const SpatialIndex& idx_y,
                                          double epsilon, int threads) {
  check_inputs(ensemble, idx_x, idx_y);
  const Index n = ensemble.dim();
  const Matrix& x = ensemble.x();
  const Matrix& y = ensemble.y();
  EstimateBatch batch{Matrix::Zero(ensemble.size(), n), Matrix::Zero(ensemble.size(), n)};

  const auto order = idx_x.tree_order();
  parallel_for(ensemble.size(), threads, [&](Index begin, Index end) {
    std::vector<double> grad(static_cast<std::size_t>(n));
    for (Index k = begin; k < end; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      auto kx = row(batch.k_x, i);
      Index count = 0;
      idx_x.visit_radius(row(x, i), epsilon, [&](Index j) {
        cost.grad_x(row(x, i), row(y, j), grad);
        for (Index a = 0; a < n; ++a) kx[a] += grad[a];
        ++count;
      });
      for (Index a = 0; a < n; ++a) kx[a] /= static_cast<double>(count);
    }
  });
  const auto order_y = idx_y.tree_order();
  parallel_for(ensemble.size(), threads, [&](Index begin, Index end) {
    std::vector<double> grad(static_cast<std::size_t>(n));
    for (Index k = begin; k < end; ++k) {
      const Index i = order_y[static_cast<std::size_t>(k)];
      auto ky = row(batch.k_y, i);
      Index count = 0;
      idx_y.visit_radius(row(y, i), epsilon, [&](Index j) {
        cost.grad_y(row(x, j), row(y, i), grad);
        for (Index a = 0; a < n; ++a) ky[a] += grad[a];
        ++count;
      });
      for (Index a = 0; a < n; ++a) ky[a] /= static_cast<double>(count);
    }
  });
  check_finite(batch);
  return batch;
}

EstimateBatch estimate_piecewise_linear(const ParticleEnsemble& ensemble, const CostModel& cost,
                                        const SpatialIndex& idx_x, const SpatialIndex& idx_y,
                                        double epsilon, double epsilon_hat, int threads) {
  check_inputs(ensemble, idx_x, idx_y);
  if (!(epsilon_hat >= 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon_hat must be >= 0");
  const Index n = ensemble.dim();
  const Matrix gx = diagonal_gradients(ensemble, cost, true, threads);
  const Matrix gy = diagonal_gradients(ensemble, cost, false, threads);
  EstimateBatch batch{Matrix(ensemble.size(), n), Matrix(ensemble.size(), n)};

  fit_all_dispatch(ensemble.x(), gx, idx_x, epsilon, epsilon_hat, threads, batch.k_x);
  fit_all_dispatch(ensemble.y(), gy, idx_y, epsilon, epsilon_hat, threads, batch.k_y);
  check_finite(batch);
  return batch;
}

}  // namespace ocd
