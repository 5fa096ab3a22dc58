#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epiconj/baseline.hpp"
#include "epiconj/problem_file.hpp"
#include "epiconj/solver.hpp"
#include "epiconj/trace_io.hpp"
#include "epiconj/verify/acceptance.hpp"

namespace epiconj::cli {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

/// "zero" or comma-separated coordinates.
inline Vector parse_x0(const std::string& text, int dim) {
  if (text == "zero") return Vector::Zero(dim);
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(x))
      throw UsageError("--x0: bad coordinate '" + item + "'");
    v.push_back(x);
  }
  if (static_cast<int>(v.size()) != dim)
    throw UsageError("--x0: expected " + std::to_string(dim) + " coordinates, got " +
                     std::to_string(v.size()));
  return detail::to_vector(v);
}

/// Seed from EPICONJ_SEED when set, else the flag value.
inline std::uint64_t effective_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("EPICONJ_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError(std::string("EPICONJ_SEED: not an integer: ") + env);
    return v;
  }
  return flag;
}

struct RunArgs {
  std::string problem;
  std::string backend = "exact";
  std::string x0 = "zero";
  double eps_g = SolverConfig{}.eps_g;
  double eps_inner = SolverConfig{}.eps_inner;
  int max_iter = SolverConfig{}.max_outer;
  std::string output = "csv";
  std::string out;
};

inline RunReport execute_run(const RunArgs& a) {
  const ProblemSpec p = resolve_problem(a.problem);
  SolverConfig cfg;
  cfg.backend = backend_from_string(a.backend);
  cfg.eps_g = a.eps_g;
  cfg.eps_inner = a.eps_inner;
  cfg.max_outer = a.max_iter;
  cfg.validate();
  const Vector x0 = parse_x0(a.x0, p.dim);

  RunReport rep;
  rep.problem = p.name;
  rep.backend = cfg.backend;
  rep.config = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  rep.trace = solve(p, x0, cfg);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.rate = rate_estimate(rep.trace);
  return rep;
}

inline int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  if (a.output != "csv" && a.output != "json")
    throw UsageError("--output must be csv or json");
  const RunReport rep = execute_run(a);
  std::string body;
  if (a.output == "csv")
    body = trace_csv(rep.trace);
  else
    body = report_json(rep).dump(2) + "\n";

  if (a.out.empty()) {
    out << body;
    err << summary_line(rep) << '\n';
  } else {
    std::ofstream f(a.out);
    if (!f) throw UsageError("cannot write '" + a.out + "'");
    f << body;
    out << summary_line(rep) << '\n';
  }
  return rep.trace.converged() ? kExitConverged : kExitNotConverged;
}

inline int cmd_suite(const std::string& suite, std::uint64_t seed, std::ostream& out) {
  const std::vector<int> ids = verify::suite_criteria(suite);
  const std::uint64_t s = effective_seed(seed);
  bool all = true;
  for (int id : ids) {
    const verify::CriterionResult r = verify::run_criterion_safe(id, s);
    all = all && r.pass;
    out << verify::format_result(r) << '\n';
  }
  return all ? 0 : 1;
}

inline int cmd_compare(const std::string& problem, long budget, const std::string& x0text,
                       const std::string& path, std::ostream& out) {
  if (budget <= 0) throw UsageError("--budget must be a positive number of oracle calls");
  const ProblemSpec p = resolve_problem(problem);
  const CompareResult res = compare_methods(p, parse_x0(x0text, p.dim), budget);

  std::ostringstream table;
  table << "method,call,f,best_error\n";
  for (const auto& r : res.rows)
    table << r.method << ',' << r.call << ',' << detail::fmt_opt(r.f) << ','
          << detail::fmt_real(r.best_error) << '\n';
  if (path.empty()) {
    out << table.str();
  } else {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << table.str();
  }
  out << "problem=" << p.name << " budget=" << budget
      << " epi_projection_error=" << detail::fmt_real(res.epi_final_error)
      << " subgradient_error=" << detail::fmt_real(res.baseline_final_error) << '\n';
  return 0;
}

/// Entry point shared by the executable and the tests; returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conjugate epi-projection convex solver"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "solve one problem and emit its trace");
  run->add_option("--problem", ra.problem, "catalog name or problem file")->required();
  run->add_option("--backend", ra.backend, "exact|cutting");
  run->add_option("--x0", ra.x0, "starting point: zero or comma-separated");
  run->add_option("--eps-g", ra.eps_g, "stop when |g_p| <= eps-g");
  run->add_option("--eps-inner", ra.eps_inner, "projection tolerance");
  run->add_option("--max-iter", ra.max_iter, "outer iteration limit");
  run->add_option("--output", ra.output, "csv|json");
  run->add_option("--out", ra.out, "write the trace here instead of stdout");

  std::string suite;
  std::uint64_t seed = 0;
  auto* su = app.add_subcommand("suite", "run an acceptance block");
  su->add_option("--suite", suite, "rates|lemmas|engines|all")->required();
  su->add_option("--seed", seed, "sampling seed (EPICONJ_SEED overrides)");

  std::string cproblem, cx0 = "zero", cout_path;
  long budget = -1;
  auto* cmp = app.add_subcommand("compare", "epi-projection vs subgradient at equal budget");
  cmp->add_option("--problem", cproblem, "catalog name or problem file")->required();
  cmp->add_option("--budget", budget, "oracle calls per method")->required();
  cmp->add_option("--x0", cx0, "starting point: zero or comma-separated");
  cmp->add_option("--out", cout_path, "write the table here instead of stdout");

  std::vector<std::string> argv_store = {"epiconj"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*run) return cmd_run(ra, out, err);
    if (*su) return cmd_suite(suite, seed, out);
    return cmd_compare(cproblem, budget, cx0, cout_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace epiconj::cli
