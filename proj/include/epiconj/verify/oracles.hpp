#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "epiconj/model.hpp"
#include "epiconj/problems.hpp"

// Brute-force references. None of these touch the engines or the analytic
// conjugate capabilities; they only call the subgradient oracle.

namespace epiconj::verify {

/// f*(g) for a 1-D problem: bisection on the subgradient for the crossing
/// point of f'(x) = g, then g x - f(x).
inline double conjugate_1d(const ProblemSpec& p, double g) {
  if (p.dim != 1) throw UsageError("conjugate_1d: problem must be one-dimensional");
  auto slope = [&](double x) { return p.oracle(Vector::Constant(1, x)).g(0); };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && slope(lo) > g; ++i) lo *= 2.0;
  for (int i = 0; i < 200 && slope(hi) < g; ++i) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < g ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return g * x - p.oracle(Vector::Constant(1, x)).f;
}

struct GridProjection1d {
  double g = 0.0;
  double mu = 0.0;
  double dist = kInf;
};

/// Nearest point of epi h to (xi, 0) over g on a grid of the given step,
/// where h is any scalar function: for fixed g the closest mu is max(xi, h(g)).
inline GridProjection1d grid_epi_projection(const std::function<double(double)>& h, double xi,
                                            double g_lo, double g_hi, double step) {
  GridProjection1d best;
  const long n = static_cast<long>(std::floor((g_hi - g_lo) / step + 0.5));
  for (long i = 0; i <= n; ++i) {
    const double g = g_lo + static_cast<double>(i) * step;
    const double mu = std::max(xi, h(g));
    const double d = std::hypot(mu - xi, g);
    if (d < best.dist) best = {g, mu, d};
  }
  return best;
}

/// Coarse grid on [g_lo, g_hi], then a fine grid of step `fine` around the coarse winner.
inline GridProjection1d grid_epi_projection_refined(const ProblemSpec& p, double xi, double g_lo,
                                                    double g_hi, double fine) {
  auto h = [&](double g) { return conjugate_1d(p, g); };
  const double coarse = 1e-3;
  const GridProjection1d c = grid_epi_projection(h, xi, g_lo, g_hi, coarse);
  return grid_epi_projection(h, xi, std::max(g_lo, c.g - 2 * coarse),
                             std::min(g_hi, c.g + 2 * coarse), fine);
}

struct GridPolyProjection {
  EpiPoint point;
  double dist = kInf;
};

/// Projection of p onto a one-dimensional bundle polyhedron in (mu, g):
/// for fixed g the feasible mu are mu >= max_i (g x_i - f_i).
inline GridPolyProjection grid_poly_projection(const EpiPoint& p, const Bundle& bundle,
                                               double g_lo, double g_hi, double step) {
  if (bundle.dim() != 1) throw UsageError("grid_poly_projection: bundle must be one-dimensional");
  GridPolyProjection best;
  const long n = static_cast<long>(std::floor((g_hi - g_lo) / step + 0.5));
  for (long i = 0; i <= n; ++i) {
    const double g = g_lo + static_cast<double>(i) * step;
    double lb = -kInf;
    for (const Cut& c : bundle.cuts()) lb = std::max(lb, g * c.x(0) - c.fx);
    const double mu = std::max(p.mu, lb);
    const double d = std::hypot(mu - p.mu, g - p.g(0));
    if (d < best.dist) best = {EpiPoint(mu, Vector::Constant(1, g)), d};
  }
  return best;
}

}  // namespace epiconj::verify
