#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "epiconj/model.hpp"
#include "epiconj/problems.hpp"
#include "epiconj/solver.hpp"

namespace epiconj {

/// Thrown by a budgeted oracle once its call allowance is spent.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Wraps the oracle so every call is logged and the (budget+1)-th call throws.
inline ProblemSpec with_budget(const ProblemSpec& p, long budget,
                               std::shared_ptr<std::vector<double>> log) {
  ProblemSpec q = p;
  q.oracle = [inner = p.oracle, budget, log](const Vector& x) {
    if (static_cast<long>(log->size()) >= budget) throw BudgetExhausted("oracle budget spent");
    OracleValue o = inner(x);
    log->push_back(o.f);
    return o;
  };
  return q;
}

/// Normalized subgradient steps x <- x - (a/sqrt(k)) g/|g|; returns f at each call.
inline std::vector<double> subgradient_method(const ProblemSpec& p, const Vector& x0, long budget,
                                              double a = 1.0) {
  if (budget <= 0) throw UsageError("subgradient_method: budget must be positive");
  std::vector<double> values;
  Vector x = x0;
  for (long k = 1; k <= budget; ++k) {
    const OracleValue o = oracle_eval(p, x);
    values.push_back(o.f);
    const double gn = o.g.norm();
    if (gn == 0.0) continue;
    x -= (a / std::sqrt(static_cast<double>(k))) * o.g / gn;
  }
  return values;
}

struct CompareRow {
  std::string method;
  long call = 0;
  std::optional<double> f;  // empty on padding rows after early termination
  double best_error = 0.0;  // best f so far minus f_star (or best f when f_star is unknown)
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double epi_final_error = 0.0;
  double baseline_final_error = 0.0;
};

namespace detail {

inline void append_rows(std::vector<CompareRow>& rows, const std::string& method,
                        const std::vector<double>& values, long budget, double f_star) {
  double best = kInf;
  for (long j = 0; j < budget; ++j) {
    CompareRow r;
    r.method = method;
    r.call = j + 1;
    if (j < static_cast<long>(values.size())) {
      r.f = values[static_cast<std::size_t>(j)];
      best = std::min(best, *r.f);
    }
    r.best_error = best - f_star;
    rows.push_back(r);
  }
}

}  // namespace detail

/// Runs the cutting-plane epi-projection method and the subgradient baseline
/// under the same oracle budget; exactly `budget` rows per method.
inline CompareResult compare_methods(const ProblemSpec& p, const Vector& x0, long budget,
                                     SolverConfig cfg = {}) {
  if (budget <= 0) throw UsageError("compare: budget must be a positive number of oracle calls");
  cfg.backend = Backend::cutting;
  cfg.max_outer = std::max(cfg.max_outer, 1000);

  auto log = std::make_shared<std::vector<double>>();
  const ProblemSpec budgeted = with_budget(p, budget, log);
  try {
    solve(budgeted, x0, cfg);
  } catch (const BudgetExhausted&) {
  }
  const std::vector<double> base = subgradient_method(p, x0, budget);

  const double fs = p.f_star.value_or(0.0);
  CompareResult out;
  detail::append_rows(out.rows, "epi-projection", *log, budget, fs);
  detail::append_rows(out.rows, "subgradient", base, budget, fs);
  out.epi_final_error = out.rows[static_cast<std::size_t>(budget - 1)].best_error;
  out.baseline_final_error = out.rows.back().best_error;
  return out;
}

}  // namespace epiconj
