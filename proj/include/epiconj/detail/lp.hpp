#pragma once

// Dense two-phase simplex for small standard-form LPs:
//   min c'x  s.t.  A x = b,  x >= 0.
// Bland's rule throughout; sizes here are a handful of rows and columns.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace epiconj::detail {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;  // primal solution
  Eigen::VectorXd y;  // equality multipliers: A'y <= c at optimality
};

namespace lp_impl {

struct Tableau {
  Eigen::MatrixXd T;  // rows 0..m-1: constraints, last row: reduced costs; last col: rhs
  std::vector<Eigen::Index> basis;
  Eigen::Index m = 0, ncols = 0;

  double& rhs(Eigen::Index i) { return T(i, ncols); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    T.row(r) /= T(r, c);
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
  }

  // Returns false on unboundedness. `allowed` masks entering columns.
  bool run(const std::vector<bool>& allowed, double tol, int max_iter, int& iters) {
    const Eigen::Index obj = m;
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (allowed[static_cast<std::size_t>(j)] && T(obj, j) < -tol) {
          enter = j;  // Bland: smallest index
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (T(i, enter) > tol) {
          const double ratio = T(i, ncols) / T(i, enter);
          if (ratio < best - 1e-15 ||
              (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++iters > max_iter) return true;
    }
  }
};

}  // namespace lp_impl

inline LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& c, int max_iter = 10000) {
  using lp_impl::Tableau;
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  LpResult out;

  const double scale = std::max(1.0, std::max(A.cwiseAbs().maxCoeff(),
                                              b.size() ? b.cwiseAbs().maxCoeff() : 0.0));
  const double tol = 1e-11 * scale;

  // Phase I with one artificial per row; rows flipped so that b >= 0.
  Tableau tab;
  tab.m = m;
  tab.ncols = n + m;
  tab.T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = b(i) < 0 ? -1.0 : 1.0;
    sign[static_cast<std::size_t>(i)] = s;
    tab.T.row(i).head(n) = s * A.row(i);
    tab.T(i, n + i) = 1.0;
    tab.T(i, n + m) = s * b(i);
  }
  tab.basis.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) tab.basis[static_cast<std::size_t>(i)] = n + i;
  // phase I objective: sum of artificials, expressed in reduced form
  for (Eigen::Index i = 0; i < m; ++i) tab.T.row(m) -= tab.T.row(i);
  for (Eigen::Index i = 0; i < m; ++i) tab.T(m, n + i) = 0.0;

  int iters = 0;
  std::vector<bool> allowed(static_cast<std::size_t>(n + m), true);
  tab.run(allowed, tol, max_iter, iters);
  if (iters > max_iter) {
    out.status = LpStatus::iteration_limit;
    return out;
  }
  if (-tab.T(m, n + m) > 1e-9 * scale) {
    out.status = LpStatus::infeasible;
    return out;
  }

  // Drive artificials out of the basis; rows where that fails are redundant.
  std::vector<bool> redundant(static_cast<std::size_t>(m), false);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis[static_cast<std::size_t>(i)] < n) continue;
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.T(i, j)) > tol) {
        col = j;
        break;
      }
    }
    if (col >= 0)
      tab.pivot(i, col);
    else
      redundant[static_cast<std::size_t>(i)] = true;
  }

  // Phase II: original costs, artificials barred from entering.
  tab.T.row(m).setZero();
  tab.T.row(m).head(n) = c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bj = tab.basis[static_cast<std::size_t>(i)];
    const double cb = bj < n ? c(bj) : 0.0;
    if (cb != 0.0) tab.T.row(m) -= cb * tab.T.row(i);
  }
  for (Eigen::Index j = n; j < n + m; ++j) allowed[static_cast<std::size_t>(j)] = false;
  if (!tab.run(allowed, tol, max_iter, iters)) {
    out.status = LpStatus::unbounded;
    return out;
  }
  if (iters > max_iter) {
    out.status = LpStatus::iteration_limit;
    return out;
  }

  out.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bj = tab.basis[static_cast<std::size_t>(i)];
    if (bj < n) out.x(bj) = tab.T(i, n + m);
  }
  out.objective = c.dot(out.x);

  // Duals from the final basis: B'y = c_B over the non-redundant rows.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (!redundant[static_cast<std::size_t>(i)]) rows.push_back(i);
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd B(k, k);
  Eigen::VectorXd cB(k);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (redundant[static_cast<std::size_t>(i)]) continue;
    const Eigen::Index bj = tab.basis[static_cast<std::size_t>(i)];
    for (Eigen::Index r = 0; r < k; ++r) {
      const Eigen::Index ar = rows[static_cast<std::size_t>(r)];
      B(r, col) = bj < n ? A(ar, bj) : (bj - n == ar ? sign[static_cast<std::size_t>(ar)] : 0.0);
    }
    cB(col) = bj < n ? c(bj) : 0.0;
    ++col;
  }
  Eigen::VectorXd yk = B.transpose().colPivHouseholderQr().solve(cB);
  out.y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index r = 0; r < k; ++r) out.y(rows[static_cast<std::size_t>(r)]) = yk(r);
  out.status = LpStatus::optimal;
  return out;
}

}  // namespace epiconj::detail
