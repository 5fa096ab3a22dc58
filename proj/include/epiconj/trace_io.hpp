#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epiconj/model.hpp"
#include "epiconj/solver.hpp"

namespace epiconj {

inline constexpr const char* kTraceHeader =
    "k,xi_k,xi_p,g_norm,f_xp,e_k,theta_k,oracle_calls,inner_iters";

namespace detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_real(*v) : ""; }

inline double parse_real(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw UsageError("trace csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

inline long parse_int(const std::string& s, int line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw UsageError("trace csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json vec_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << detail::fmt_real(r.xi_k) << ',' << detail::fmt_real(r.xi_p) << ','
        << detail::fmt_real(r.g_norm) << ',' << detail::fmt_opt(r.f_xp) << ','
        << detail::fmt_opt(r.e_k) << ',' << detail::fmt_opt(r.theta_k) << ','
        << r.oracle_calls << ',' << r.inner_iters << '\n';
  }
}

inline std::string trace_csv(const SolveTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

/// Reads the records of a CSV trace (x_p is not part of the CSV).
inline std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw UsageError("trace csv: missing or unexpected header");
  std::vector<TraceRecord> out;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9)
      throw UsageError("trace csv line " + std::to_string(ln) + ": expected 9 fields");
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return detail::parse_real(s, ln);
    };
    TraceRecord r;
    r.k = static_cast<int>(detail::parse_int(f[0], ln));
    r.xi_k = detail::parse_real(f[1], ln);
    r.xi_p = detail::parse_real(f[2], ln);
    r.g_norm = detail::parse_real(f[3], ln);
    r.f_xp = opt(f[4]);
    r.e_k = opt(f[5]);
    r.theta_k = opt(f[6]);
    r.oracle_calls = detail::parse_int(f[7], ln);
    r.inner_iters = detail::parse_int(f[8], ln);
    out.push_back(std::move(r));
  }
  return out;
}

/// Everything a run reports: the trace plus config echo, rate class and totals.
struct RunReport {
  std::string problem;
  Backend backend = Backend::exact;
  SolverConfig config;
  SolveTrace trace;
  RateEstimate rate;
  double wall_seconds = 0.0;

  long total_oracle_calls() const { return trace.total_oracle_calls(); }
  long total_inner_iters() const { return trace.total_inner_iters(); }
  long total_cuts() const {
    // every oracle call produces one cut
    return backend == Backend::cutting ? total_oracle_calls() : 0;
  }
};

inline nlohmann::json report_json(const RunReport& rep) {
  using nlohmann::json;
  json cfg = {{"eps_g", rep.config.eps_g},
              {"eps_xi", rep.config.eps_xi},
              {"eps_inner", rep.config.eps_inner},
              {"max_outer", rep.config.max_outer},
              {"max_inner", rep.config.max_inner},
              {"backend", to_string(rep.config.backend)}};
  if (rep.config.bundle_capacity == Bundle::kUnlimited)
    cfg["bundle_capacity"] = "unlimited";
  else
    cfg["bundle_capacity"] = rep.config.bundle_capacity;

  json records = json::array();
  for (const auto& r : rep.trace.records) {
    records.push_back({{"k", r.k},
                       {"xi_k", r.xi_k},
                       {"xi_p", r.xi_p},
                       {"g_norm", r.g_norm},
                       {"x_p", r.x_p.size() ? detail::vec_json(r.x_p) : json(nullptr)},
                       {"f_xp", detail::opt_json(r.f_xp)},
                       {"e_k", detail::opt_json(r.e_k)},
                       {"theta_k", detail::opt_json(r.theta_k)},
                       {"oracle_calls", r.oracle_calls},
                       {"inner_iters", r.inner_iters}});
  }
  json lam = json::array(), q = json::array();
  for (double v : rep.rate.lambdas) lam.push_back(v);
  for (double v : rep.rate.qs) q.push_back(v);

  return {{"problem", rep.problem},
          {"backend", to_string(rep.backend)},
          {"config", cfg},
          {"termination", to_string(rep.trace.reason)},
          {"converged", rep.trace.converged()},
          {"iterations", rep.trace.records.size()},
          {"f_hat_star", rep.trace.f_hat_star},
          {"best_f", rep.trace.best_f},
          {"best_x", detail::vec_json(rep.trace.best_x)},
          {"classification", to_string(rep.rate.classification)},
          {"lambda_k", lam},
          {"q_k", q},
          {"wall_seconds", rep.wall_seconds},
          {"totals",
           {{"oracle_calls", rep.total_oracle_calls()},
            {"cuts", rep.total_cuts()},
            {"inner_iters", rep.total_inner_iters()}}},
          {"theta_caveat", rep.trace.theta_caveat},
          {"records", records}};
}

inline std::string summary_line(const RunReport& rep) {
  std::ostringstream os;
  os << "problem=" << rep.problem << " backend=" << to_string(rep.backend)
     << " iterations=" << rep.trace.records.size()
     << " f_hat_star=" << detail::fmt_real(rep.trace.f_hat_star)
     << " classification=" << to_string(rep.rate.classification)
     << " termination=" << to_string(rep.trace.reason);
  return os.str();
}

}  // namespace epiconj
