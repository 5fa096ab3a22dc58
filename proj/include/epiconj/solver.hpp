#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "epiconj/epiproject.hpp"
#include "epiconj/model.hpp"
#include "epiconj/problems.hpp"

namespace epiconj {

enum class Termination { running, optimal, stall, max_outer };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::running: return "running";
    case Termination::optimal: return "optimal";
    case Termination::stall: return "stall";
    case Termination::max_outer: return "max_outer";
  }
  return "running";
}

struct TraceRecord {
  int k = 0;
  double xi_k = 0.0;
  double xi_p = 0.0;
  double g_norm = 0.0;
  std::optional<double> f_xp;
  std::optional<double> e_k;
  std::optional<double> theta_k;
  long oracle_calls = 0;
  long inner_iters = 0;
  Vector x_p;  // empty on the terminating record
};

struct SolveTrace {
  std::string problem;
  Backend backend = Backend::exact;
  std::vector<TraceRecord> records;
  Termination reason = Termination::running;
  Vector best_x;
  double best_f = kInf;
  double f_hat_star = 0.0;  // -xi at termination
  std::string theta_caveat =
      "theta uses x_p.z in place of the directional derivative of f* at g_p; "
      "exact when the subdifferential of f* at g_p is a singleton, an under-estimate otherwise";

  bool converged() const {
    return reason == Termination::optimal || reason == Termination::stall;
  }
  long total_oracle_calls() const {
    long s = 0;
    for (const auto& r : records) s += r.oracle_calls;
    return s;
  }
  long total_inner_iters() const {
    long s = 0;
    for (const auto& r : records) s += r.inner_iters;
    return s;
  }
};

struct SolveState {
  int k = 0;
  double xi_k = 0.0;
  Bundle bundle;
  Vector best_x;
  double best_f = kInf;
  SolveTrace trace;
  int stall_count = 0;
  long pending_calls = 0;  // oracle calls not yet attributed to a record

  bool done() const { return trace.reason != Termination::running; }
};

/// xi_0 = -f(x0), a lower estimate of f*(0) = -f_star.
inline double initial_xi(const ProblemSpec& p, const Vector& x0) {
  return -oracle_eval(p, x0).f;
}

/// theta = x_p.z - (X*)_z with z = g_p/|g_p|; empty when not computable.
inline std::optional<double> theta_diagnostic(const ProblemSpec& p, const EpiProjection& proj) {
  if (!p.x_star_support || proj.at_foot()) return std::nullopt;
  const double gn = proj.g_p.norm();
  if (!(gn > 0.0)) return std::nullopt;
  const Vector z = proj.g_p / gn;
  return proj.x_p.dot(z) - p.x_star_support(z);
}

inline SolveState start(const ProblemSpec& p, const Vector& x0, const SolverConfig& cfg) {
  cfg.validate();
  SolveState s{0, 0.0, Bundle(cfg.bundle_capacity), {}, kInf, {}, 0, 0};
  const OracleValue o = oracle_eval(p, x0);
  s.pending_calls = 1;
  s.xi_k = -o.f;
  s.best_x = x0;
  s.best_f = o.f;
  if (cfg.backend == Backend::cutting) s.bundle.add(Cut{x0, o.f, o.g});
  s.trace.problem = p.name;
  s.trace.backend = cfg.backend;
  s.trace.best_x = s.best_x;
  s.trace.best_f = s.best_f;
  s.trace.f_hat_star = -s.xi_k;
  return s;
}

/// One Project / Support-Update iteration.
inline void step(const ProblemSpec& p, SolveState& s, const SolverConfig& cfg) {
  if (s.done()) throw ContractViolation("step: solve already terminated");

  const EpiProjection proj = cfg.backend == Backend::exact
                                 ? project_exact(p, s.xi_k, cfg.eps_inner)
                                 : project_cutting_into(p, s.xi_k, s.bundle, cfg);

  TraceRecord rec;
  rec.k = s.k;
  rec.xi_k = s.xi_k;
  rec.xi_p = proj.xi_p;
  rec.g_norm = proj.g_p.norm();
  if (p.f_star) rec.e_k = -*p.f_star - s.xi_k;
  rec.inner_iters = proj.inner_iters;
  rec.oracle_calls = s.pending_calls + proj.oracle_calls;
  s.pending_calls = 0;

  const double tol = cfg.backend == Backend::exact ? 1e-9 * (1.0 + std::abs(s.xi_k)) : 1e-6;
  if (proj.xi_p < s.xi_k - tol)
    throw InvariantError("step: projection below the query point (xi_p < xi_k)");

  if (rec.g_norm <= cfg.eps_g || proj.at_foot()) {
    s.trace.records.push_back(rec);
    s.trace.reason = Termination::optimal;
    // at the foot xi_p is f*(0) itself
    s.trace.f_hat_star = proj.at_foot() ? -std::max(s.xi_k, proj.xi_p) : -s.xi_k;
    return;
  }

  const OracleValue o = p.oracle(proj.x_p);
  ++rec.oracle_calls;
  rec.x_p = proj.x_p;
  rec.f_xp = o.f;
  rec.theta_k = theta_diagnostic(p, proj);
  s.trace.records.push_back(rec);

  const double xi_next = -o.f;
  if (!std::isfinite(xi_next)) throw InvariantError("step: f(x_p) is not finite");
  if (xi_next < proj.xi_p - tol)
    throw InvariantError("step: support update fell below the projection (xi_{k+1} < xi_p)");

  if (cfg.backend == Backend::cutting) s.bundle.add(Cut{proj.x_p, o.f, o.g});
  if (o.f < s.best_f) {
    s.best_f = o.f;
    s.best_x = proj.x_p;
  }

  const double inc = xi_next - s.xi_k;
  s.stall_count = inc <= cfg.eps_xi ? s.stall_count + 1 : 0;
  s.xi_k = std::max(s.xi_k, xi_next);
  ++s.k;
  s.trace.best_x = s.best_x;
  s.trace.best_f = s.best_f;
  s.trace.f_hat_star = -s.xi_k;

  if (s.stall_count >= 3)
    s.trace.reason = Termination::stall;
  else if (s.k >= cfg.max_outer)
    s.trace.reason = Termination::max_outer;
}

inline SolveTrace solve(const ProblemSpec& p, const Vector& x0, const SolverConfig& cfg) {
  SolveState s = start(p, x0, cfg);
  while (!s.done()) step(p, s, cfg);
  return s.trace;
}

// ---------------------------------------------------------------------------
// Rate diagnostics
// ---------------------------------------------------------------------------

enum class RateClass { insufficient, linear_or_worse, superlinear, quadratic, finite };

inline std::string to_string(RateClass c) {
  switch (c) {
    case RateClass::insufficient: return "insufficient";
    case RateClass::linear_or_worse: return "linear-or-worse";
    case RateClass::superlinear: return "superlinear";
    case RateClass::quadratic: return "quadratic";
    case RateClass::finite: return "finite";
  }
  return "insufficient";
}

struct RateEstimate {
  std::vector<double> lambdas;  // e_{k+1}/e_k over usable pairs
  std::vector<double> qs;       // e_{k+1}/e_k^2 over usable pairs
  RateClass classification = RateClass::insufficient;
};

inline constexpr double kErrorFloor = 1e-12;

/// Classifies the error sequence e_k of a trace.
///   finite: terminated optimally, final error <= 1e-12, reached in one jump
///     from an error >= 1e-6 that lands far below a quadratic step
///     (e_K <= 1e-4 e_{K-1}^2), or at k = 0;
///   quadratic: >= 3 usable pairs, max q <= 10 min q, lambda decreasing, last lambda < 0.5;
///   superlinear: last three lambdas each <= 0.8 times the previous;
///   otherwise linear-or-worse ("insufficient" below 3 usable pairs).
inline RateEstimate rate_estimate(const SolveTrace& trace) {
  RateEstimate out;
  std::vector<double> e;
  for (const auto& r : trace.records) {
    if (!r.e_k) return out;
    e.push_back(*r.e_k);
  }
  if (e.empty()) return out;

  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    if (e[k] > kErrorFloor && e[k + 1] > kErrorFloor) {
      out.lambdas.push_back(e[k + 1] / e[k]);
      out.qs.push_back(e[k + 1] / (e[k] * e[k]));
    }
  }

  const std::size_t K = e.size() - 1;
  if (trace.reason == Termination::optimal && e[K] <= kErrorFloor) {
    if (K == 0 || (e[K - 1] >= 1e-6 && e[K] <= 1e-4 * e[K - 1] * e[K - 1])) {
      out.classification = RateClass::finite;
      return out;
    }
  }

  const std::size_t n = out.lambdas.size();
  if (n < 3) return out;

  const auto [qmin, qmax] = std::minmax_element(out.qs.begin(), out.qs.end());
  bool lambda_decreasing = true;
  for (std::size_t i = 1; i < n; ++i)
    if (!(out.lambdas[i] < out.lambdas[i - 1])) lambda_decreasing = false;
  if (*qmin > 0.0 && *qmax <= 10.0 * *qmin && lambda_decreasing && out.lambdas.back() < 0.5) {
    out.classification = RateClass::quadratic;
    return out;
  }

  bool super = true;
  for (std::size_t i = n - 2; i < n; ++i)
    if (!(out.lambdas[i] <= 0.8 * out.lambdas[i - 1])) super = false;
  out.classification = super ? RateClass::superlinear : RateClass::linear_or_worse;
  return out;
}

}  // namespace epiconj
