#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epiconj/epiproject.hpp"
#include "epiconj/model.hpp"
#include "epiconj/polyproj.hpp"
#include "epiconj/problems.hpp"
#include "epiconj/solver.hpp"
#include "epiconj/verify/oracles.hpp"

namespace epiconj::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::string format_result(const CriterionResult& r) {
  return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
         ": " + r.detail;
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline ProblemSpec problem(const std::string& name) {
  auto p = find_problem(name);
  if (!p) throw UsageError("missing catalog problem " + name);
  return *p;
}

inline Vector sample_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  const double r = radius * std::pow(unit(rng), 1.0 / n);
  return v * (r / v.norm());
}

inline SolverConfig config(Backend b) {
  SolverConfig cfg;
  cfg.backend = b;
  return cfg;
}

}  // namespace detail

// Problem groups
inline const std::vector<std::string> kSupQuadratic = {"quad1d", "quadN_2", "quadN_5"};
inline const std::vector<std::string> kSharp = {"sharpL1_1", "sharpL1_2", "sharpL1_3",
                                                "sharpL1_4", "sharpL1_5"};

/// Outer iteration counts of the finite-termination runs (exact engine, x0 = 0).
inline const std::map<std::string, int> kFiniteIterationPins = {
    {"sharpL1_1", 1}, {"sharpL1_2", 1}, {"sharpL1_3", 1},
    {"sharpL1_4", 1}, {"sharpL1_5", 1}, {"maxAffine_2", 1}};

inline CriterionResult criterion_monotone() {
  CriterionResult r{1, "monotone convergence", true, ""};
  int runs = 0;
  double worst_final = 0.0;
  std::ostringstream bad;
  for (const auto& p : catalog()) {
    for (Backend b : {Backend::exact, Backend::cutting}) {
      ++runs;
      const double above = b == Backend::exact ? 1e-9 : 1e-6;
      const double final_tol = b == Backend::exact ? 1e-8 : 1e-5;
      SolveTrace t;
      try {
        t = solve(p, Vector::Zero(p.dim), detail::config(b));
      } catch (const Error& e) {
        r.pass = false;
        bad << " " << p.name << "/" << to_string(b) << " threw: " << e.what() << ";";
        continue;
      }
      const double fs = *p.f_star;
      for (std::size_t k = 0; k < t.records.size(); ++k) {
        const double xi = t.records[k].xi_k;
        if ((k > 0 && xi < t.records[k - 1].xi_k) || xi > -fs + above) {
          r.pass = false;
          bad << " " << p.name << "/" << to_string(b) << " k=" << k << ";";
          break;
        }
      }
      const double err = std::abs(t.f_hat_star - fs);
      worst_final = std::max(worst_final, err / final_tol);
      if (!t.converged() || err > final_tol) {
        r.pass = false;
        bad << " " << p.name << "/" << to_string(b) << " final error " << detail::num(err) << " ("
            << to_string(t.reason) << ");";
      }
    }
  }
  r.detail = std::to_string(runs) + " runs, worst final error / tolerance = " +
             detail::num(worst_final) + bad.str();
  return r;
}

inline CriterionResult criterion_quadratic_rate() {
  CriterionResult r{2, "quadratic rate on sup-quadratic problems", true, ""};
  std::ostringstream out;
  for (const auto& name : kSupQuadratic) {
    const ProblemSpec p = detail::problem(name);
    const Vector x0 = name == "quadN_5" ? Vector(Vector::Constant(p.dim, 0.5))
                                        : Vector(Vector::Zero(p.dim));
    SolverConfig cfg = detail::config(Backend::exact);
    cfg.eps_g = 1e-14;
    const SolveTrace t = solve(p, x0, cfg);
    const double tau = *p.tau;
    std::vector<double> e;
    for (const auto& rec : t.records) e.push_back(*rec.e_k);
    bool ok = e.front() >= 0.5 && e.front() <= 2.0;
    int reached = -1;
    double worst = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] < 1e-12) {
        reached = static_cast<int>(k);
        break;
      }
      if (k >= 1 && k + 1 < e.size()) {
        const double ratio = e[k + 1] / (2.0 / tau * e[k] * e[k]);
        worst = std::max(worst, ratio);
        if (ratio > 1.0) ok = false;
      }
    }
    if (reached < 0 || reached > 8) ok = false;
    if (!ok) r.pass = false;
    out << " " << name << ": e0=" << detail::num(e.front()) << " below 1e-12 at k=" << reached
        << " max e_{k+1}/(2e_k^2/tau)=" << detail::num(worst) << ";";
  }
  r.detail = out.str();
  return r;
}

inline CriterionResult criterion_finite_termination() {
  CriterionResult r{3, "finite termination on sharp problems", true, ""};
  std::ostringstream out;
  std::vector<std::string> names = kSharp;
  names.push_back("maxAffine_2");
  for (const auto& name : names) {
    const ProblemSpec p = detail::problem(name);
    const SolveTrace t = solve(p, Vector::Zero(p.dim), detail::config(Backend::exact));
    const auto& last = t.records.back();
    const int K = last.k;
    const double err = std::abs(t.f_hat_star - *p.f_star);
    bool ok = t.reason == Termination::optimal && last.g_norm <= 1e-10 && K <= 10 && err <= 1e-10;
    if (auto pin = kFiniteIterationPins.find(name); pin != kFiniteIterationPins.end())
      ok = ok && pin->second == K;
    if (!ok) r.pass = false;
    out << " " << name << ": K=" << K << " err=" << detail::num(err) << ";";
  }
  r.detail = out.str();
  return r;
}

inline CriterionResult criterion_superlinear() {
  CriterionResult r{4, "superlinear but not quadratic on quartic_2", true, ""};
  const ProblemSpec p = detail::problem("quartic_2");
  const SolveTrace t = solve(p, Vector::Zero(p.dim), detail::config(Backend::exact));
  const RateEstimate est = rate_estimate(t);
  const auto& l = est.lambdas;
  const auto& q = est.qs;
  const std::size_t n = l.size();
  std::ostringstream out;
  if (n < 4) {
    r.pass = false;
    out << "only " << n << " usable steps";
  } else {
    for (std::size_t i = n - 3; i < n; ++i) {
      if (!(l[i] <= 0.8 * l[i - 1])) r.pass = false;
      if (!(q[i] > q[i - 1])) r.pass = false;
    }
    out << "last lambdas";
    for (std::size_t i = n - 4; i < n; ++i) out << " " << detail::num(l[i]);
    out << ", last q";
    for (std::size_t i = n - 4; i < n; ++i) out << " " << detail::num(q[i]);
    out << ", classification " << to_string(est.classification);
  }
  r.detail = out.str();
  return r;
}

inline CriterionResult criterion_engine_equivalence() {
  CriterionResult r{5, "engine equivalence", true, ""};
  std::vector<std::string> names = kSupQuadratic;
  names.insert(names.end(), kSharp.begin(), kSharp.end());
  names.push_back("quartic_2");
  names.push_back("quadPlusL1_2");
  double worst_proj = 0.0, worst_trace = 0.0;
  std::ostringstream bad;
  for (const auto& name : names) {
    const ProblemSpec p = detail::problem(name);
    const SolverConfig cfg = detail::config(Backend::cutting);
    for (double d : {2.0, 1.0, 0.5, 0.1, 0.01}) {
      const double xi = -*p.f_star - d;
      const EpiProjection ex = project_exact(p, xi);
      const EpiProjection cu = project_cutting(p, xi, Bundle(cfg.bundle_capacity), cfg).first;
      const double diff = std::max(std::abs(ex.xi_p - cu.xi_p), (ex.g_p - cu.g_p).norm());
      worst_proj = std::max(worst_proj, diff);
      if (diff > 1e-6) {
        r.pass = false;
        bad << " " << name << " xi=" << detail::num(xi) << " diff " << detail::num(diff) << ";";
      }
    }
    const SolveTrace te = solve(p, Vector::Zero(p.dim), detail::config(Backend::exact));
    const SolveTrace tc = solve(p, Vector::Zero(p.dim), cfg);
    const std::size_t m = std::min(te.records.size(), tc.records.size());
    for (std::size_t k = 0; k < m; ++k) {
      const double diff = std::abs(te.records[k].xi_k - tc.records[k].xi_k);
      worst_trace = std::max(worst_trace, diff);
      if (diff > 1e-6) {
        r.pass = false;
        bad << " " << name << " trace k=" << k << " diff " << detail::num(diff) << ";";
        break;
      }
    }
  }
  r.detail = "max projection diff " + detail::num(worst_proj) + ", max trace diff " +
             detail::num(worst_trace) + bad.str();
  return r;
}

inline CriterionResult criterion_sup_sub(std::uint64_t seed) {
  CriterionResult r{6, "conjugate sub-quadratic at the origin", true, ""};
  std::mt19937_64 rng(seed);
  std::vector<std::string> names = kSupQuadratic;
  names.push_back("quadPlusL1_2");
  int violations = 0, samples = 0;
  double worst = -kInf;
  for (const auto& name : names) {
    const ProblemSpec p = detail::problem(name);
    const double f0 = conjugate_eval(p, Vector::Zero(p.dim));
    for (int s = 0; s < 1000; ++s, ++samples) {
      const Vector g = detail::sample_ball(rng, p.dim, 1.0);
      const double slack =
          conjugate_eval(p, g) - f0 - g.dot(*p.x_star) - g.squaredNorm() / (2.0 * *p.tau);
      worst = std::max(worst, slack);
      if (slack > 1e-12) ++violations;
    }
  }
  r.pass = violations == 0;
  r.detail = std::to_string(samples) + " samples, " + std::to_string(violations) +
             " violations, max slack " + detail::num(worst);
  return r;
}

inline CriterionResult criterion_lincon(std::uint64_t seed) {
  CriterionResult r{7, "conjugate linear near the origin", true, ""};
  std::mt19937_64 rng(seed);
  std::vector<std::string> names = kSharp;
  names.push_back("maxAffine_2");
  int violations = 0, samples = 0;
  double worst = 0.0;
  for (const auto& name : names) {
    const ProblemSpec p = detail::problem(name);
    for (int s = 0; s < 1000; ++s, ++samples) {
      const Vector g = detail::sample_ball(rng, p.dim, *p.rho / 2.0);
      const double dev =
          std::abs(conjugate_eval(p, g) - (g.dot(*p.x_star) - *p.f_star));
      worst = std::max(worst, dev);
      if (dev > 1e-12) ++violations;
    }
  }
  r.pass = violations == 0;
  r.detail = std::to_string(samples) + " samples, " + std::to_string(violations) +
             " violations, max deviation " + detail::num(worst);
  return r;
}

inline CriterionResult criterion_decrease_estimate() {
  CriterionResult r{8, "per-step decrease estimate", true, ""};
  int checked = 0, violations = 0;
  double worst = -kInf;
  for (const auto& p : catalog()) {
    const SolveTrace t = solve(p, Vector::Zero(p.dim), detail::config(Backend::exact));
    for (std::size_t k = 0; k + 1 < t.records.size(); ++k) {
      const auto& rec = t.records[k];
      if (!rec.theta_k || !t.records[k + 1].e_k) continue;
      ++checked;
      const double slack = *t.records[k + 1].e_k - rec.g_norm * *rec.theta_k;
      worst = std::max(worst, slack);
      if (slack > 1e-8) ++violations;
    }
  }
  r.pass = violations == 0 && checked > 0;
  r.detail = std::to_string(checked) + " steps, " + std::to_string(violations) +
             " violations, max e_{k+1} - |g_p| theta " + detail::num(worst);
  return r;
}

inline CriterionResult criterion_polyproj(std::uint64_t seed) {
  CriterionResult r{9, "polyhedral projection", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> dim_dist(1, 6), cut_dist(1, 10);
  auto random_bundle = [&](int n, int m) {
    Bundle b(Bundle::kUnlimited);
    for (int i = 0; i < m; ++i) {
      Vector x(n);
      for (int j = 0; j < n; ++j) x(j) = unit(rng);
      b.add(Cut{x, unit(rng), Vector::Zero(n)});
    }
    return b;
  };
  auto random_point = [&](int n) {
    Vector g(n);
    for (int j = 0; j < n; ++j) g(j) = unit(rng);
    return EpiPoint(2.0 * unit(rng), g);
  };

  double worst_kkt = 0.0;
  int failures = 0;
  for (int s = 0; s < 500; ++s) {
    const int n = dim_dist(rng);
    const Bundle b = random_bundle(n, cut_dist(rng));
    const EpiPoint p = random_point(n);
    try {
      const PolyProjection q = project_polyhedron(p, b);
      const double res = kkt_residual(p, q.point, b, q.multipliers);
      worst_kkt = std::max(worst_kkt, res);
      if (res > 1e-8) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }

  const double step = 1e-3;
  double worst_grid = 0.0;
  int grid_failures = 0;
  for (int s = 0; s < 50; ++s) {
    const Bundle b = random_bundle(1, cut_dist(rng));
    const EpiPoint p = random_point(1);
    double lb = -kInf;
    for (const Cut& c : b.cuts()) lb = std::max(lb, p.g(0) * c.x(0) - c.fx);
    const double reach = std::max(0.0, lb - p.mu) + step;
    const GridPolyProjection grid =
        grid_poly_projection(p, b, p.g(0) - reach, p.g(0) + reach, step);
    const PolyProjection q = project_polyhedron(p, b);
    const double diff = distance(q.point, grid.point);
    worst_grid = std::max(worst_grid, diff);
    if (diff > 2.0 * step) ++grid_failures;
  }

  r.pass = failures == 0 && grid_failures == 0;
  r.detail = "500 instances, max KKT residual " + detail::num(worst_kkt) + ", " +
             std::to_string(failures) + " failures; 50 grid instances, max distance " +
             detail::num(worst_grid) + ", " + std::to_string(grid_failures) + " failures";
  return r;
}

/// Pinned worked example: quad1d projected from xi_0 = -1.
struct WorkedExample {
  double g_p = -0.4040;
  double xi_p = -0.3224;
  double x_p = 0.5960;
  double xi_1 = -0.0816;
};

inline CriterionResult criterion_worked_example() {
  CriterionResult r{10, "worked example on quad1d", true, ""};
  const ProblemSpec p = detail::problem("quad1d");
  const double xi0 = -1.0;
  const GridProjection1d grid = grid_epi_projection_refined(p, xi0, -2.0, 0.0, 1e-6);
  const double grid_x = -grid.g / (grid.mu - xi0);
  const double grid_xi1 = -p.oracle(Vector::Constant(1, grid_x)).f;

  const EpiProjection proj = project_exact(p, xi0);
  const double x = proj.x_p(0);
  const double xi1 = -p.oracle(proj.x_p).f;

  const WorkedExample pin;
  const double tol = 1e-3;
  auto close = [&](double a, double b) { return std::abs(a - b) <= tol; };
  r.pass = close(grid.g, pin.g_p) && close(grid.mu, pin.xi_p) && close(grid_x, pin.x_p) &&
           close(grid_xi1, pin.xi_1) && close(proj.g_p(0), grid.g) && close(proj.xi_p, grid.mu) &&
           close(x, grid_x) && close(xi1, grid_xi1);
  std::ostringstream out;
  out.precision(6);
  out << "grid g_p=" << grid.g << " xi_p=" << grid.mu << " x_p=" << grid_x << " xi_1=" << grid_xi1
      << "; engine g_p=" << proj.g_p(0) << " xi_p=" << proj.xi_p << " x_p=" << x
      << " xi_1=" << xi1;
  r.detail = out.str();
  return r;
}

inline std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "rates") return {2, 3, 4, 8};
  if (suite == "lemmas") return {6, 7};
  if (suite == "engines") return {1, 5, 9, 10};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  throw UsageError("unknown suite '" + suite + "' (expected rates|lemmas|engines|all)");
}

inline CriterionResult run_criterion(int id, std::uint64_t seed) {
  switch (id) {
    case 1: return criterion_monotone();
    case 2: return criterion_quadratic_rate();
    case 3: return criterion_finite_termination();
    case 4: return criterion_superlinear();
    case 5: return criterion_engine_equivalence();
    case 6: return criterion_sup_sub(seed);
    case 7: return criterion_lincon(seed);
    case 8: return criterion_decrease_estimate();
    case 9: return criterion_polyproj(seed);
    case 10: return criterion_worked_example();
    default: throw UsageError("no criterion " + std::to_string(id));
  }
}

/// Runs a criterion, turning an escaped engine error into a FAIL line.
inline CriterionResult run_criterion_safe(int id, std::uint64_t seed) {
  try {
    return run_criterion(id, seed);
  } catch (const Error& e) {
    return {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
  }
}

}  // namespace epiconj::verify
