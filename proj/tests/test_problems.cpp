#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "epiconj/problem_file.hpp"
#include "epiconj/problems.hpp"
#include "epiconj/verify/oracles.hpp"

using namespace epiconj;

TEST(Catalog, SortedWithGroundTruth) {
  const auto cat = catalog();
  ASSERT_EQ(cat.size(), 11u);
  for (std::size_t i = 1; i < cat.size(); ++i) EXPECT_LT(cat[i - 1].name, cat[i].name);
  for (const auto& p : cat) {
    EXPECT_TRUE(p.f_star.has_value()) << p.name;
    EXPECT_TRUE(p.has_exact_projection()) << p.name;
  }
  const ProblemSpec p1 = *find_problem("quad1d");
  EXPECT_EQ(*p1.f_star, 0.0);
  EXPECT_EQ((*p1.x_star)(0), 1.0);
  EXPECT_FALSE(find_problem("nosuch").has_value());
}

TEST(Oracle, Examples) {
  const ProblemSpec p1 = *find_problem("quad1d");
  const OracleValue o = oracle_eval(p1, Vector::Zero(1));
  EXPECT_DOUBLE_EQ(o.f, 0.5);
  EXPECT_DOUBLE_EQ(o.g(0), -1.0);

  const ProblemSpec p3 = make_sharp_l1("l1", Vector::Zero(2));
  const OracleValue o3 = oracle_eval(p3, vec({1.0, -2.0}));
  EXPECT_DOUBLE_EQ(o3.f, 3.0);
  EXPECT_EQ(o3.g, vec({1.0, -1.0}));

  EXPECT_THROW(oracle_eval(p3, Vector::Zero(3)), UsageError);
  EXPECT_THROW(oracle_eval(p3, vec({NAN, 0.0})), UsageError);
}

TEST(Oracle, MaxAffineTieTakesLowestIndex) {
  const ProblemSpec p5 = *find_problem("maxAffine_2");
  // pieces 0, 1, 2 tie at x_star
  const OracleValue o = oracle_eval(p5, *p5.x_star);
  EXPECT_NEAR(o.f, 0.5, 1e-15);
  EXPECT_EQ(o.g, vec({1.0, 0.0}));
}

TEST(Conjugate, Examples) {
  const ProblemSpec p1 = *find_problem("quad1d");
  EXPECT_NEAR(conjugate_eval(p1, vec({-0.404})), -0.32243, 1e-4);
  EXPECT_DOUBLE_EQ(conjugate_eval(p1, vec({-0.404})), -0.404 + 0.5 * 0.404 * 0.404);

  const ProblemSpec p3 = make_sharp_l1("l1", Vector::Zero(2));
  EXPECT_TRUE(std::isinf(conjugate_eval(p3, vec({2.0, 0.0}))));
  EXPECT_EQ(conjugate_eval(p3, Vector::Zero(2)), 0.0);
  EXPECT_EQ(conjugate_eval(make_sharp_l1("l1", Vector::Zero(1)), vec({0.5})), 0.0);

  const ProblemSpec p2 = make_quadratic("q", Vector::Ones(3), Vector::Zero(3));
  const Vector y = vec({1.0, -2.0, 0.5});
  EXPECT_TRUE(conjugate_prox(p2, y, 3.0).isApprox(y / 4.0));
  EXPECT_THROW(conjugate_prox(p2, y, -1.0), UsageError);
}

TEST(Conjugate, QuarticMatchesGridMaximization) {
  const ProblemSpec p4 = *find_problem("quartic_2");
  for (const Vector& g : {vec({0.3, -0.1}), vec({-1.0, 2.0}), vec({0.01, 0.0})}) {
    const double s = g.norm();
    double best = -kInf;
    for (double t = 0.0; t <= 2.0; t += 1e-5) best = std::max(best, s * t - std::pow(t, 4));
    EXPECT_NEAR(conjugate_eval(p4, g) - g.dot(*p4.x_star), best, 1e-9);
    EXPECT_NEAR(best, 3.0 * std::pow(4.0, -4.0 / 3.0) * std::pow(s, 4.0 / 3.0), 1e-9);
  }
}

TEST(Conjugate, OneDimensionalMatchesBisectionOracle) {
  const ProblemSpec q = make_quartic("q1", vec({0.3}));
  const ProblemSpec l = make_sharp_l1("l1", vec({-0.4}));
  const ProblemSpec p1 = *find_problem("quad1d");
  for (double g : {-0.9, -0.3, 0.0, 0.2, 0.7}) {
    EXPECT_NEAR(conjugate_eval(q, vec({g})), verify::conjugate_1d(q, g), 1e-10);
    EXPECT_NEAR(conjugate_eval(l, vec({g})), verify::conjugate_1d(l, g), 1e-10);
    EXPECT_NEAR(conjugate_eval(p1, vec({g})), verify::conjugate_1d(p1, g), 1e-10);
  }
}

// Fenchel-Young: f(x) + f*(g) = g.x for g the oracle subgradient at x.
TEST(ConjugateProperty, FenchelYoungAtOracleSubgradient) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& p : catalog()) {
    for (int s = 0; s < 100; ++s) {
      Vector x(p.dim);
      for (int i = 0; i < p.dim; ++i) x(i) = u(rng);
      const OracleValue o = p.oracle(x);
      const double fs = conjugate_eval(p, o.g);
      EXPECT_NEAR(o.f + fs, o.g.dot(x), 1e-9 * (1.0 + std::abs(o.f) + std::abs(fs))) << p.name;
    }
  }
}

// prox optimality against random competitors
TEST(ConjugateProperty, ProxMinimizesItsObjective) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const auto& p : catalog()) {
    if (!p.has_prox()) continue;
    for (int s = 0; s < 50; ++s) {
      Vector y(p.dim);
      for (int i = 0; i < p.dim; ++i) y(i) = u(rng);
      const double lam = std::abs(u(rng)) + 0.1;
      const Vector z = conjugate_prox(p, y, lam);
      const double fz = lam * conjugate_eval(p, z) + 0.5 * (z - y).squaredNorm();
      for (int t = 0; t < 20; ++t) {
        Vector w = z;
        for (int i = 0; i < p.dim; ++i) w(i) += 0.05 * u(rng);
        const double fw = conjugate_eval(p, w);
        if (!std::isfinite(fw)) continue;
        EXPECT_LE(fz, lam * fw + 0.5 * (w - y).squaredNorm() + 1e-10) << p.name;
      }
    }
  }
}

TEST(Validate, CatalogPasses) {
  for (const auto& p : catalog()) {
    const ValidationReport rep = validate_problem(p, p.name == "quad1d" ? 1000 : 200, 3);
    EXPECT_TRUE(rep.ok()) << p.name << ": " << (rep.ok() ? "" : rep.violations.front());
    EXPECT_GT(rep.checks, 0);
  }
  const ProblemSpec l3 = make_sharp_l1("l1", Vector::Zero(3));
  EXPECT_EQ(conjugate_eval(l3, Vector::Zero(3)), -*l3.f_star);
}

TEST(Validate, CorruptedOracleReported) {
  ProblemSpec p = *find_problem("quad1d");
  p.oracle = [inner = p.oracle](const Vector& x) {
    OracleValue o = inner(x);
    o.g *= 2.0;
    return o;
  };
  const ValidationReport rep = validate_problem(p, 200, 0);
  ASSERT_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations) found = found || v.find("subgradient inequality") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(MaxAffine, RejectsUnboundedAndFlat) {
  EXPECT_THROW(make_max_affine("up", {vec({1.0}), vec({2.0})}, {0.0, 0.0}), UsageError);
  EXPECT_THROW(make_max_affine("ragged", {vec({1.0}), vec({1.0, 2.0})}, {0.0, 0.0}), UsageError);
  const ProblemSpec abs1 = make_max_affine("abs", {vec({1.0}), vec({-1.0})}, {0.0, 0.0});
  EXPECT_NEAR(*abs1.f_star, 0.0, 1e-12);
  EXPECT_NEAR(*abs1.rho, 1.0, 1e-9);
}

TEST(ProblemFile, ParsesQuadAndMaxAffine) {
  const ProblemSpec q = parse_problem(R"({"type":"quad","Q":[2,1],"c":[1,0],"name":"mine"})");
  EXPECT_EQ(q.name, "mine");
  EXPECT_EQ(q.dim, 2);
  EXPECT_DOUBLE_EQ(oracle_eval(q, Vector::Zero(2)).f, 1.0);
  EXPECT_DOUBLE_EQ(*q.tau, 1.0);

  const ProblemSpec m = parse_problem(R"({"type":"max_affine","A":[[1],[-1]],"b":[0,1]})", "file");
  EXPECT_EQ(m.name, "file");
  EXPECT_NEAR(*m.f_star, 0.5, 1e-12);
}

TEST(ProblemFile, RejectsMalformed) {
  EXPECT_THROW(parse_problem("{"), UsageError);
  EXPECT_THROW(parse_problem(R"({"type":"cubic"})"), UsageError);
  EXPECT_THROW(parse_problem(R"({"type":"quad","Q":[1],"c":[1,2]})"), UsageError);
  EXPECT_THROW(parse_problem(R"({"type":"quad","Q":[0],"c":[1]})"), UsageError);
  EXPECT_THROW(parse_problem(R"({"type":"quad","Q":["a"],"c":[1]})"), UsageError);
  EXPECT_THROW(parse_problem(R"({"type":"max_affine","A":[],"b":[]})"), UsageError);
  EXPECT_THROW(resolve_problem("/nonexistent/problem.json"), UsageError);
}
