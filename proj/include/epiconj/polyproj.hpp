#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "epiconj/detail/nnls.hpp"
#include "epiconj/model.hpp"

namespace epiconj {

/// Projection of a point onto the intersection of the cut half-spaces of a bundle.
struct PolyProjection {
  EpiPoint point;
  std::vector<double> multipliers;
  double kkt_residual = 0.0;
  int sweeps = 0;
};

namespace detail {

// Constraint rows a_i = (-1, x_i) acting on the stacked point, bounds b_i = f(x_i).
inline void cut_system(const Bundle& bundle, Matrix& A, Vector& b) {
  const auto m = static_cast<Eigen::Index>(bundle.size());
  const auto d = static_cast<Eigen::Index>(bundle.dim()) + 1;
  A.resize(m, d);
  b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Cut& c = bundle[static_cast<std::size_t>(i)];
    A(i, 0) = -1.0;
    A.row(i).tail(d - 1) = c.x.transpose();
    b(i) = c.fx;
  }
}

inline double kkt_residual_stacked(const Vector& p, const Vector& q, const Matrix& A,
                                   const Vector& b, const Vector& lambda) {
  const Vector viol = A * q - b;
  double r = 0.0;
  for (Eigen::Index i = 0; i < viol.size(); ++i) {
    r = std::max(r, viol(i));
    r = std::max(r, std::abs(lambda(i) * viol(i)));
    r = std::max(r, -lambda(i));
  }
  const Vector stat = q - p + A.transpose() * lambda;
  if (stat.size() > 0) r = std::max(r, stat.cwiseAbs().maxCoeff());
  return r;
}

}  // namespace detail

/// Recomputes the KKT residual of (q, multipliers) for projecting p onto the
/// bundle polyhedron: the max of primal infeasibility, stationarity error
/// (sup norm), complementary slackness |l_i * viol_i| and multiplier negativity.
inline double kkt_residual(const EpiPoint& p, const EpiPoint& q, const Bundle& bundle,
                           const std::vector<double>& multipliers) {
  if (multipliers.size() != bundle.size())
    throw UsageError("kkt_residual: one multiplier per cut required");
  if (bundle.empty()) return (q - p).stacked().cwiseAbs().maxCoeff();
  if (p.dim() != bundle.dim() || q.dim() != bundle.dim())
    throw UsageError("kkt_residual: dimension mismatch");
  Matrix A;
  Vector b;
  detail::cut_system(bundle, A, b);
  const Vector lambda = Eigen::Map<const Vector>(multipliers.data(),
                                                 static_cast<Eigen::Index>(multipliers.size()));
  return detail::kkt_residual_stacked(p.stacked(), q.stacked(), A, b, lambda);
}

/// Euclidean projection of p onto the bundle polyhedron by Hildreth's dual
/// coordinate ascent. Every `refine_every` sweeps the equality system on the
/// current positive multipliers is solved directly and kept if it is a KKT
/// point. After `max_sweeps` a least-distance solve is tried before giving up.
inline PolyProjection project_polyhedron(const EpiPoint& p, const Bundle& bundle,
                                         double tol = 1e-10, int max_sweeps = 10000) {
  if (bundle.empty()) throw UsageError("project_polyhedron: empty bundle");
  if (!(tol > 0.0)) throw UsageError("project_polyhedron: tol must be positive");
  if (p.dim() != bundle.dim()) throw UsageError("project_polyhedron: dimension mismatch");
  if (!std::isfinite(p.mu) || !all_finite(p.g))
    throw UsageError("project_polyhedron: non-finite point");

  Matrix A;
  Vector b;
  detail::cut_system(bundle, A, b);
  const Eigen::Index m = A.rows();
  const Vector pv = p.stacked();
  const Vector norms2 = A.rowwise().squaredNorm();

  Vector lambda = Vector::Zero(m);
  Vector z = pv;

  auto finish = [&](const Vector& q, const Vector& l, int sweeps) {
    PolyProjection out;
    out.point = EpiPoint::from_stacked(q);
    out.multipliers.assign(l.data(), l.data() + l.size());
    out.kkt_residual = detail::kkt_residual_stacked(pv, q, A, b, l);
    out.sweeps = sweeps;
    return out;
  };

  // Direct solve on the support of the current multipliers (plus violated cuts).
  auto refine = [&](Vector& q_out, Vector& l_out) {
    std::vector<Eigen::Index> S;
    const Vector viol = A * z - b;
    for (Eigen::Index i = 0; i < m; ++i)
      if (lambda(i) > 0.0 || viol(i) > tol) S.push_back(i);
    if (S.empty()) return false;
    const auto k = static_cast<Eigen::Index>(S.size());
    Matrix As(k, A.cols());
    Vector bs(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      As.row(j) = A.row(S[static_cast<std::size_t>(j)]);
      bs(j) = b(S[static_cast<std::size_t>(j)]);
    }
    // A_S (p - A_S' l) = b_S
    const Matrix G = As * As.transpose();
    const Vector rhs = As * pv - bs;
    const Vector ls = G.completeOrthogonalDecomposition().solve(rhs);
    if ((ls.array() < 0.0).any() || !ls.allFinite()) return false;
    l_out = Vector::Zero(m);
    for (Eigen::Index j = 0; j < k; ++j) l_out(S[static_cast<std::size_t>(j)]) = ls(j);
    q_out = pv - A.transpose() * l_out;
    return detail::kkt_residual_stacked(pv, q_out, A, b, l_out) <= tol;
  };

  if (((A * pv - b).array() <= 0.0).all()) return finish(pv, lambda, 0);

  const int refine_every = 20;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (norms2(i) == 0.0) continue;
      const double delta = (A.row(i).dot(z) - b(i)) / norms2(i);
      const double next = std::max(0.0, lambda(i) + delta);
      const double step = next - lambda(i);
      if (step != 0.0) {
        z -= step * A.row(i).transpose();
        lambda(i) = next;
        change = std::max(change, std::abs(step));
      }
    }
    if (change <= tol &&
        detail::kkt_residual_stacked(pv, z, A, b, lambda) <= tol)
      return finish(z, lambda, sweep + 1);
    if ((sweep + 1) % refine_every == 0) {
      Vector q, l;
      if (refine(q, l)) return finish(q, l, sweep + 1);
    }
  }

  // Fallback: least-distance problem min ||u|| s.t. A u <= b - A p.
  Vector u, l;
  if (detail::least_distance(-A, A * pv - b, u, &l)) {
    PolyProjection out = finish(pv + u, l, sweep);
    if (out.kkt_residual <= tol) return out;
  }
  const double res = detail::kkt_residual_stacked(pv, z, A, b, lambda);
  throw InnerSolverError("project_polyhedron: no KKT point within " +
                             std::to_string(max_sweeps) + " sweeps",
                         z(0), z.tail(z.size() - 1), res);
}

}  // namespace epiconj
