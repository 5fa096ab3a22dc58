#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "epiconj/detail/nnls.hpp"
#include "epiconj/model.hpp"
#include "epiconj/polyproj.hpp"
#include "epiconj/problems.hpp"

namespace epiconj {

/// Result of projecting (xi_k, 0) onto epi f*.
struct EpiProjection {
  double xi_k = 0.0;
  double xi_p = 0.0;
  Vector g_p;
  Vector x_p;            // empty when g_p = 0
  double lambda = 0.0;   // xi_p - xi_k, computed without cancellation
  double opt_residual = 0.0;
  double membership_gap = 0.0;
  int cuts_added = 0;
  int inner_iters = 0;
  int oracle_calls = 0;
  // cutting engine: certified distance bounds per inner iteration
  std::vector<double> lower_history;
  std::vector<double> upper_history;

  bool at_foot() const { return x_p.size() == 0; }
};

/// x_p = -g_p / (xi_p - xi_k).
inline Vector trial_point(double xi_k, const EpiProjection& proj) {
  const double denom = proj.xi_p - xi_k;
  if (!(denom > 0.0)) throw ContractViolation("trial_point: requires xi_p > xi_k");
  return -proj.g_p / denom;
}

namespace detail {

inline EpiProjection foot_projection(double xi_k, double xi_p, int n) {
  EpiProjection r;
  r.xi_k = xi_k;
  r.xi_p = xi_p;
  r.g_p = Vector::Zero(n);
  return r;
}

}  // namespace detail

/// Projection with the analytic conjugate. With a prox it solves
/// phi(l) = f*(prox_{l f*}(0)) - xi_k - l = 0 by bisection on [0, f*(0) - xi_k];
/// otherwise it defers to the problem's own epi-projection.
inline EpiProjection project_exact(const ProblemSpec& p, double xi_k, double tol = 1e-12) {
  if (!std::isfinite(xi_k)) throw UsageError("project_exact: xi_k must be finite");
  const int n = p.dim;
  const Vector zero = Vector::Zero(n);

  if (p.has_conjugate() && p.has_prox()) {
    const double f0 = p.conjugate(zero);
    if (f0 <= xi_k + tol) return detail::foot_projection(xi_k, std::max(f0, xi_k), n);

    auto phi = [&](double l) { return p.conjugate(p.conjugate_prox(zero, l)) - xi_k - l; };
    double lo = 0.0, hi = f0 - xi_k;
    double phi_lo = f0 - xi_k, phi_hi = phi(hi);
    int iters = 0;
    for (; iters < 4000; ++iters) {
      const double mid = lo + 0.5 * (hi - lo);
      if (!(mid > lo && mid < hi)) break;
      const double v = phi(mid);
      if (!std::isfinite(v))
        throw EngineError("project_exact: conjugate not finite along the prox path", xi_k,
                          zero, kInf);
      if (v > 0.0) {
        lo = mid;
        phi_lo = v;
      } else {
        hi = mid;
        phi_hi = v;
      }
      if (v == 0.0) break;
    }
    const double lambda = std::abs(phi_lo) < std::abs(phi_hi) ? lo : hi;

    EpiProjection r;
    r.xi_k = xi_k;
    r.lambda = lambda;
    r.g_p = p.conjugate_prox(zero, lambda);
    r.xi_p = p.conjugate(r.g_p);
    r.opt_residual = std::abs(r.xi_p - xi_k - lambda);
    r.inner_iters = iters;
    if (r.g_p.norm() == 0.0) return detail::foot_projection(xi_k, r.xi_p, n);
    r.x_p = -r.g_p / lambda;
    return r;
  }

  if (p.epi_projection) {
    if (p.has_conjugate()) {
      const double f0 = p.conjugate(zero);
      if (f0 <= xi_k + tol) return detail::foot_projection(xi_k, std::max(f0, xi_k), n);
    }
    const EpiPoint q = p.epi_projection(EpiPoint{xi_k, zero});
    EpiProjection r;
    r.xi_k = xi_k;
    r.g_p = q.g;
    r.xi_p = q.mu;
    r.lambda = q.mu - xi_k;
    r.inner_iters = 1;
    if (p.has_conjugate()) r.opt_residual = std::abs(p.conjugate(q.g) - q.mu);
    if (q.g.norm() == 0.0) return detail::foot_projection(xi_k, std::max(q.mu, xi_k), n);
    if (!(r.lambda > 0.0))
      throw EngineError("project_exact: projection is not above the query point", q.mu, q.g,
                        r.lambda);
    r.x_p = -r.g_p / r.lambda;
    return r;
  }

  throw CapabilityError("problem '" + p.name +
                        "' has no conjugate/prox or epi-projection; use the cutting backend");
}

/// Projection from oracle calls only.
///
/// The bundle defines two models of epi f*: the inner model
/// conv{(g_i.x_i - f(x_i), g_i)} + cone{(1, 0)} built from the graph points of
/// the cuts, and the outer model given by the cut half-spaces. Their distances
/// to p = (xi_k, 0) bound dist(p, epi f*) from above (U) and below (L). The
/// next query is the Kelley point -u_g/u_mu of the inner projection p + u.
/// The inner projection is accepted once U - L <= eps_inner * min(1, U); its distance to
/// the true projection is at most sqrt(U^2 - L^2), reported as opt_residual.
inline EpiProjection project_cutting_into(const ProblemSpec& p, double xi_k, Bundle& bundle,
                                          const SolverConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(xi_k)) throw UsageError("project_cutting: xi_k must be finite");
  const int n = p.dim;
  if (!bundle.empty() && bundle.dim() != n)
    throw UsageError("project_cutting: bundle dimension does not match the problem");

  EpiProjection r;
  r.xi_k = xi_k;

  auto query = [&](const Vector& x) {
    OracleValue o = p.oracle(x);
    ++r.oracle_calls;
    ++r.cuts_added;
    return Cut{x, o.f, std::move(o.g)};
  };
  if (bundle.empty()) bundle.add(query(Vector::Zero(n)));

  const Vector pv = EpiPoint{xi_k, Vector::Zero(n)}.stacked();
  const Eigen::Index d = n + 1;
  Matrix ray = Matrix::Zero(d, 1);
  ray(0, 0) = 1.0;

  const double stall_gap = std::sqrt(cfg.eps_inner);
  const int stall_window = 25;
  double best_gap = kInf;
  int since_improved = 0;
  double explore_step = 0.0;
  Vector best_u;

  for (int it = 1; it <= cfg.max_inner; ++it) {
    r.inner_iters = it;
    const std::size_t m = bundle.size();

    // inner model
    Matrix V(d, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
      V.col(static_cast<Eigen::Index>(i)) = bundle[i].graph_point().stacked() - pv;
    detail::MinNormResult mn = detail::min_norm_point(V, ray);
    if (mn.point.size() != d) {
      // degenerate NNLS: fall back to the nearest graph point (still an upper bound)
      Eigen::Index j = 0;
      V.colwise().norm().minCoeff(&j);
      mn.weights = Vector::Unit(static_cast<Eigen::Index>(m), j);
      mn.point = V.col(j);
      if (mn.point(0) < 0.0) mn.point(0) = 0.0;
    }
    const Vector& u = mn.point;
    const double U = u.norm();
    best_u = u;

    if (U <= cfg.eps_g) {
      // p is in epi f* or within eps_g of it: the true g_p is at most U
      EpiProjection foot = detail::foot_projection(xi_k, xi_k + u(0), n);
      foot.membership_gap = U;
      foot.opt_residual = U;
      foot.inner_iters = it;
      foot.oracle_calls = r.oracle_calls;
      foot.cuts_added = r.cuts_added;
      foot.lower_history = std::move(r.lower_history);
      foot.upper_history = std::move(r.upper_history);
      foot.upper_history.push_back(U);
      foot.lower_history.push_back(0.0);
      return foot;
    }

    // outer model: weak-duality bound from the polyhedral multipliers
    double L = 0.0;
    std::vector<double> outer_mult(m, 0.0);
    {
      Matrix A;
      Vector b;
      detail::cut_system(bundle, A, b);
      const Vector viol = A * pv - b;
      for (std::size_t i = 0; i < m; ++i)
        L = std::max(L, viol(static_cast<Eigen::Index>(i)) /
                            A.row(static_cast<Eigen::Index>(i)).norm());
      try {
        PolyProjection pp = project_polyhedron(EpiPoint{xi_k, Vector::Zero(n)}, bundle,
                                               cfg.eps_inner, cfg.max_inner);
        outer_mult = pp.multipliers;
      } catch (const InnerSolverError&) {
        // keep the single-cut bound
      }
      const Vector lam = Eigen::Map<const Vector>(outer_mult.data(),
                                                  static_cast<Eigen::Index>(m));
      const double dual = lam.dot(viol) - 0.5 * (A.transpose() * lam).squaredNorm();
      if (dual > 0.0) L = std::max(L, std::sqrt(2.0 * dual));
    }
    L = std::min(L, U);
    r.upper_history.push_back(U);
    r.lower_history.push_back(L);
    const double gap = U - L;

    if (gap < 0.5 * best_gap) {
      best_gap = gap;
      since_improved = 0;
    } else {
      ++since_improved;
    }
    const double scale = std::min(1.0, U);
    const double noise = std::numeric_limits<double>::epsilon() * (std::abs(xi_k) + U);
    const bool accept =
        gap <= std::max(cfg.eps_inner * scale, 16.0 * noise) ||
        (since_improved >= stall_window && gap <= std::max(stall_gap * scale, 1e3 * noise));
    if (accept) {
      const double u_mu = u(0);
      r.g_p = u.tail(n);
      r.lambda = u_mu;
      r.xi_p = xi_k + u_mu;
      r.membership_gap = gap;
      r.opt_residual = std::sqrt(std::max(0.0, (U - L) * (U + L)));
      if (r.g_p.norm() == 0.0) {
        r.x_p.resize(0);
        r.g_p = Vector::Zero(n);
        return r;
      }
      if (!(u_mu > 0.0))
        throw EngineError("project_cutting: accepted candidate has no vertical offset",
                          r.xi_p, r.g_p, gap);
      r.x_p = -r.g_p / u_mu;
      return r;
    }

    // next query point
    const double u_mu = u(0);
    const Vector u_g = u.tail(n);
    Vector x_next;
    if (u_mu > 1e-9 * U) {
      x_next = -u_g / u_mu;
      explore_step = 0.0;
    }
    if (x_next.size() == 0 || !x_next.allFinite()) {
      // inner projection is (nearly) horizontal: step away from the deepest cut
      std::size_t deepest = 0;
      double h_best = -kInf;
      for (std::size_t i = 0; i < m; ++i) {
        const Cut& c = bundle[i];
        const double h = (-xi_k - c.fx) / std::sqrt(1.0 + c.x.squaredNorm());
        if (h > h_best) {
          h_best = h;
          deepest = i;
        }
      }
      const Vector& xb = bundle[deepest].x;
      explore_step = explore_step == 0.0 ? std::max(1.0, xb.norm()) : 2.0 * explore_step;
      const double gn = u_g.norm();
      x_next = gn > 0.0 ? Vector(xb - explore_step * u_g / gn) : xb;
    }

    std::vector<bool> active(m, false);
    for (std::size_t i = 0; i < m; ++i)
      active[i] = mn.weights(static_cast<Eigen::Index>(i)) > 0.0 || outer_mult[i] > 0.0;
    Cut c = query(x_next);
    if (!std::isfinite(c.fx) || !all_finite(c.g))
      throw EngineError("project_cutting: oracle returned a non-finite value", xi_k + u(0),
                        u.tail(n), gap);
    bundle.add(std::move(c), active);
  }

  throw EngineError("project_cutting: no certified projection within max_inner iterations",
                    xi_k + best_u(0), best_u.tail(n), best_gap);
}

/// Value-returning form: the enriched bundle is returned with the projection.
inline std::pair<EpiProjection, Bundle> project_cutting(const ProblemSpec& p, double xi_k,
                                                        Bundle bundle,
                                                        const SolverConfig& cfg) {
  EpiProjection r = project_cutting_into(p, xi_k, bundle, cfg);
  return {std::move(r), std::move(bundle)};
}

}  // namespace epiconj
