#pragma once

// Lawson-Hanson active set NNLS and the min-norm-point reduction built on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace epiconj::detail {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Solves min ||A x - b|| subject to x >= 0 (Lawson & Hanson, ch. 23).
inline NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       int max_iter = 0) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(30 * std::max<Eigen::Index>(n, 1));

  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  if (n == 0) {
    out.residual_norm = b.norm();
    out.converged = true;
    return out;
  }

  // Entering test relative to |A_j| |r|: the residual can be tiny next to |b|.
  const double eps = std::numeric_limits<double>::epsilon();
  const Eigen::VectorXd col_norms = A.colwise().norm().transpose();
  const double tol = 10.0 * eps * A.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(m, n));

  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  std::vector<bool> blocked(static_cast<std::size_t>(n), false);
  Eigen::VectorXd& x = out.x;
  Eigen::VectorXd w = A.transpose() * (b - A * x);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    z.setZero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd Ap(m, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
      Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k)
      z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  Eigen::VectorXd z(n);
  int iter = 0;
  for (;;) {
    // entering index: largest positive dual among the free set
    Eigen::Index enter = -1;
    double wmax = 0.0;
    const double rnorm = (b - A * x).norm();
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (passive[uj] || blocked[uj]) continue;
      if (w(j) > 100.0 * eps * col_norms(j) * rnorm && w(j) > wmax) {
        wmax = w(j);
        enter = j;
      }
    }
    if (enter < 0) {
      out.converged = true;
      break;
    }
    if (++iter > max_iter) break;

    passive[static_cast<std::size_t>(enter)] = true;
    solve_passive(z);
    if (z(enter) <= 0.0) {
      // numerically the entering column does not help; exclude it
      passive[static_cast<std::size_t>(enter)] = false;
      blocked[static_cast<std::size_t>(enter)] = true;
      continue;
    }

    for (;;) {
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) break;
      if (++iter > max_iter) break;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double denom = x(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
      solve_passive(z);
    }
    x = z;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)]) x(j) = 0.0;
    std::fill(blocked.begin(), blocked.end(), false);
    w = A.transpose() * (b - A * x);
  }
  out.iterations = iter;
  out.residual_norm = (A * x - b).norm();
  return out;
}

struct MinNormResult {
  Eigen::VectorXd point;    // the min-norm point
  Eigen::VectorXd weights;  // convex weights on the points (sum to 1)
  Eigen::VectorXd rays;     // nonnegative weights on the rays
  bool converged = false;
};

/// Minimum-norm point of conv{columns of P} + cone{columns of R}.
///
/// Homogenized as the NNLS  min ||P w + R t||^2 + s^2 (1 - 1'w)^2  over
/// w, t >= 0; writing w = a*alpha with alpha in the simplex the objective is
/// monotone in ||P alpha + R t/a||, so the normalized solution is exact for
/// any weight s > 0.
inline MinNormResult min_norm_point(const Eigen::MatrixXd& P,
                                    const Eigen::MatrixXd& R) {
  const Eigen::Index d = P.rows();
  const Eigen::Index m = P.cols();
  const Eigen::Index r = R.cols();
  MinNormResult out;
  if (m == 0) return out;

  // any positive weight on the simplex row gives the same normalized answer;
  // the nearest point's norm keeps the system well scaled
  double scale = std::numeric_limits<double>::infinity();
  Eigen::Index nearest = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double nj = P.col(j).norm();
    if (nj < scale) {
      scale = nj;
      nearest = j;
    }
  }
  if (scale == 0.0) {
    out.weights = Eigen::VectorXd::Unit(m, nearest);
    out.rays = Eigen::VectorXd::Zero(r);
    out.point = Eigen::VectorXd::Zero(d);
    out.converged = true;
    return out;
  }

  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d + 1, m + r);
  E.topLeftCorner(d, m) = P;
  if (r > 0) E.block(0, m, d, r) = R;
  E.row(d).head(m).setConstant(scale);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
  rhs(d) = scale;

  // unit columns; nonnegativity is unaffected by positive column scaling
  const Eigen::VectorXd cn = E.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < m + r; ++j)
    if (cn(j) > 0.0) E.col(j) /= cn(j);
  NnlsResult nn = nnls(E, rhs);
  for (Eigen::Index j = 0; j < m + r; ++j)
    if (cn(j) > 0.0) nn.x(j) /= cn(j);
  const double s = nn.x.head(m).sum();
  if (!(s > 0.0)) return out;
  out.weights = nn.x.head(m) / s;
  out.rays = nn.x.tail(r) / s;
  out.point = P * out.weights + (r > 0 ? Eigen::VectorXd(R * out.rays)
                                       : Eigen::VectorXd::Zero(d));
  out.converged = nn.converged;
  return out;
}

/// Least-distance programming: min ||u|| s.t. G u >= h, via NNLS on the
/// dual (Lawson & Hanson, ch. 23). Returns false when infeasible.
inline bool least_distance(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                           Eigen::VectorXd& u, Eigen::VectorXd* multipliers = nullptr) {
  const Eigen::Index m = G.rows();
  const Eigen::Index n = G.cols();
  if ((h.array() <= 0.0).all()) {
    u = Eigen::VectorXd::Zero(n);
    if (multipliers) *multipliers = Eigen::VectorXd::Zero(m);
    return true;
  }
  Eigen::MatrixXd E(n + 1, m);
  E.topRows(n) = G.transpose();
  E.row(n) = h.transpose();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
  f(n) = 1.0;
  NnlsResult nn = nnls(E, f);
  Eigen::VectorXd res = E * nn.x - f;
  if (!(std::abs(res(n)) > 1e-14)) return false;
  u = -res.head(n) / res(n);
  if (multipliers) *multipliers = nn.x / (-res(n));
  return true;
}

}  // namespace epiconj::detail
