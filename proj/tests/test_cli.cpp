#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "epiconj/cli.hpp"

using namespace epiconj;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string field(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) return "";
  const auto start = pos + key.size() + 1;
  return line.substr(start, line.find_first_of(" \n", start) - start);
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("epiconj_" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CliRun, Quad1dExact) {
  const Result r = run({"run", "--problem", "quad1d", "--backend", "exact"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kTraceHeader);
  EXPECT_EQ(field(r.err, "classification"), "quadratic");
  EXPECT_NEAR(std::stod(field(r.err, "f_hat_star")), 0.0, 1e-10);
}

TEST(CliRun, SharpFinite) {
  const fs::path out = temp_file("sharp.csv");
  const Result r = run({"run", "--problem", "sharpL1_3", "--out", out.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(field(r.out, "classification"), "finite");
  EXPECT_LE(std::stoi(field(r.out, "iterations")), 5);
  std::istringstream in(slurp(out));
  EXPECT_EQ(read_trace_csv(in).size(), static_cast<std::size_t>(std::stoi(field(r.out, "iterations"))));
  fs::remove(out);
}

TEST(CliRun, JsonMirrorsTrace) {
  const Result r = run({"run", "--problem", "quadN_2", "--backend", "cutting", "--output", "json"});
  ASSERT_EQ(r.code, 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["problem"], "quadN_2");
  EXPECT_EQ(j["backend"], "cutting");
  EXPECT_EQ(j["converged"], true);
  EXPECT_EQ(j["records"].size(), j["iterations"].get<std::size_t>());
  long calls = 0;
  for (const auto& rec : j["records"]) {
    calls += rec["oracle_calls"].get<long>();
    for (const char* key : {"k", "xi_k", "xi_p", "g_norm", "f_xp", "e_k", "theta_k", "inner_iters"})
      EXPECT_TRUE(rec.contains(key)) << key;
  }
  EXPECT_EQ(j["totals"]["oracle_calls"].get<long>(), calls);
  EXPECT_EQ(j["totals"]["cuts"].get<long>(), calls);
}

TEST(CliRun, ExitCodes) {
  EXPECT_EQ(run({"run", "--problem", "nosuch"}).code, 1);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--backend", "simplex"}).code, 1);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--bogus"}).code, 1);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--x0", "1,2"}).code, 1);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--x0", "abc"}).code, 1);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--eps-g", "-1"}).code, 1);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--output", "xml"}).code, 1);
  EXPECT_EQ(run({"run"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"run", "--problem", "quartic_2", "--max-iter", "1"}).code, 2);
  EXPECT_EQ(run({"run", "--problem", "quad1d", "--x0", "1"}).code, 0);
  const Result bad = run({"run", "--problem", "nosuch"});
  EXPECT_NE(bad.err.find("unknown problem"), std::string::npos);
}

TEST(CliRun, ProblemFile) {
  const fs::path file = temp_file("tri.json");
  std::ofstream(file) << R"({"type":"max_affine","A":[[1,0],[0,1],[-1,-1]],"b":[0,0,-1]})";
  const Result r = run({"run", "--problem", file.string(), "--backend", "cutting"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(field(r.err, "problem"), "epiconj_tri");
  std::ofstream(file) << "{not json";
  EXPECT_EQ(run({"run", "--problem", file.string()}).code, 1);
  fs::remove(file);
}

TEST(TraceCsv, RoundTripIsExact) {
  for (const char* name : {"quad1d", "quartic_2", "maxAffine_2"}) {
    const ProblemSpec p = *find_problem(name);
    SolverConfig cfg;
    cfg.backend = Backend::cutting;
    SolveTrace t = solve(p, Vector::Zero(p.dim), cfg);
    const std::string text = trace_csv(t);
    std::istringstream in(text);
    const std::vector<TraceRecord> back = read_trace_csv(in);
    ASSERT_EQ(back.size(), t.records.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
      EXPECT_EQ(back[k].xi_k, t.records[k].xi_k);
      EXPECT_EQ(back[k].xi_p, t.records[k].xi_p);
      EXPECT_EQ(back[k].g_norm, t.records[k].g_norm);
      EXPECT_EQ(back[k].f_xp, t.records[k].f_xp);
      EXPECT_EQ(back[k].e_k, t.records[k].e_k);
      EXPECT_EQ(back[k].theta_k, t.records[k].theta_k);
      EXPECT_EQ(back[k].oracle_calls, t.records[k].oracle_calls);
    }
    SolveTrace copy;
    copy.records = back;
    EXPECT_EQ(trace_csv(copy), text);
  }
}

TEST(TraceCsv, RejectsMalformed) {
  std::istringstream no_header("k,xi\n");
  EXPECT_THROW(read_trace_csv(no_header), UsageError);
  std::istringstream short_row(std::string(kTraceHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_trace_csv(short_row), UsageError);
  std::istringstream bad_num(std::string(kTraceHeader) + "\n0,x,0,0,,,,1,0\n");
  EXPECT_THROW(read_trace_csv(bad_num), UsageError);
}

TEST(CliSuite, LemmasPass) {
  const Result r = run({"suite", "--suite", "lemmas", "--seed", "7"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("PASS [6]"), std::string::npos);
  EXPECT_NE(r.out.find("PASS [7]"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliSuite, RatesPass) {
  const Result r = run({"suite", "--suite", "rates"});
  EXPECT_EQ(r.code, 0);
  for (const char* id : {"PASS [2]", "PASS [3]", "PASS [4]", "PASS [8]"})
    EXPECT_NE(r.out.find(id), std::string::npos) << id;
}

TEST(CliSuite, UnknownSuiteAndSeedOverride) {
  EXPECT_EQ(run({"suite", "--suite", "everything"}).code, 1);
  EXPECT_EQ(cli::effective_seed(5), 5u);
  setenv("EPICONJ_SEED", "42", 1);
  EXPECT_EQ(cli::effective_seed(5), 42u);
  setenv("EPICONJ_SEED", "4x", 1);
  EXPECT_THROW(cli::effective_seed(5), UsageError);
  unsetenv("EPICONJ_SEED");
}

TEST(CliCompare, TableShapeAndOutcome) {
  const Result r = run({"compare", "--problem", "quartic_2", "--budget", "30"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "method,call,f,best_error");
  int epi = 0, base = 0;
  while (std::getline(in, line)) {
    if (line.rfind("epi-projection,", 0) == 0) ++epi;
    if (line.rfind("subgradient,", 0) == 0) ++base;
  }
  EXPECT_EQ(epi, 30);
  EXPECT_EQ(base, 30);

  const Result q = run({"compare", "--problem", "quadN_2", "--budget", "200"});
  ASSERT_EQ(q.code, 0);
  const std::string summary = q.out.substr(q.out.rfind("problem="));
  EXPECT_LE(std::stod(field(summary, "epi_projection_error")),
            std::stod(field(summary, "subgradient_error")));

  EXPECT_EQ(run({"compare", "--problem", "quadN_2", "--budget", "0"}).code, 1);
  EXPECT_EQ(run({"compare", "--problem", "nosuch", "--budget", "5"}).code, 1);
}
