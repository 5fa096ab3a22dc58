#include <gtest/gtest.h>

#include <random>

#include "epiconj/polyproj.hpp"
#include "epiconj/problems.hpp"
#include "epiconj/verify/oracles.hpp"

using namespace epiconj;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Bundle single(double x, double fx) {
  Bundle b;
  b.add(Cut{v1(x), fx, v1(0.0)});
  return b;
}

struct Instances {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> u{-1.0, 1.0};
  explicit Instances(std::uint64_t seed) : rng(seed) {}

  Bundle bundle(int n, int m) {
    Bundle b(Bundle::kUnlimited);
    for (int i = 0; i < m; ++i) {
      Vector x(n);
      for (int j = 0; j < n; ++j) x(j) = u(rng);
      b.add(Cut{x, u(rng), Vector::Zero(n)});
    }
    return b;
  }
  EpiPoint point(int n) {
    Vector g(n);
    for (int j = 0; j < n; ++j) g(j) = 2.0 * u(rng);
    return {2.0 * u(rng), g};
  }
};

}  // namespace

TEST(ProjectPolyhedron, HalfPlaneExamples) {
  const PolyProjection a = project_polyhedron(EpiPoint(-1.0, v1(0.0)), single(0.0, 0.0));
  EXPECT_NEAR(a.point.mu, 0.0, 1e-12);
  EXPECT_NEAR(a.point.g(0), 0.0, 1e-12);
  ASSERT_EQ(a.multipliers.size(), 1u);
  EXPECT_NEAR(a.multipliers[0], 1.0, 1e-12);

  const PolyProjection b = project_polyhedron(EpiPoint(0.0, v1(0.0)), single(1.0, -1.0));
  EXPECT_NEAR(b.point.mu, 0.5, 1e-12);
  EXPECT_NEAR(b.point.g(0), -0.5, 1e-12);
}

TEST(ProjectPolyhedron, QuadraticCutsMatchGrid) {
  const ProblemSpec p1 = *find_problem("quad1d");
  Bundle b;
  for (double x : {0.0, 1.0, 2.0}) {
    const OracleValue o = p1.oracle(v1(x));
    b.add(Cut{v1(x), o.f, o.g});
  }
  const EpiPoint p(-1.0, v1(0.0));
  const PolyProjection q = project_polyhedron(p, b);
  const verify::GridPolyProjection grid = verify::grid_poly_projection(p, b, -3.0, 3.0, 1e-3);
  EXPECT_LE(distance(q.point, grid.point), 2e-3);
  EXPECT_LE(q.kkt_residual, 1e-10);
}

TEST(ProjectPolyhedron, Errors) {
  EXPECT_THROW(project_polyhedron(EpiPoint(0.0, v1(0.0)), Bundle{}), UsageError);
  EXPECT_THROW(project_polyhedron(EpiPoint(0.0, Vector::Zero(2)), single(0.0, 0.0)), UsageError);
  EXPECT_THROW(project_polyhedron(EpiPoint(NAN, v1(0.0)), single(0.0, 0.0)), UsageError);
}

TEST(KktResidual, Examples) {
  const Bundle b = single(1.0, -1.0);
  const EpiPoint p(0.0, v1(0.0));
  EXPECT_LE(kkt_residual(p, EpiPoint(0.5, v1(-0.5)), b, {0.5}), 1e-14);

  // step 1e-3 outward along the cut normal (-1, 1)/sqrt(2)
  const double s = 1e-3 / std::sqrt(2.0);
  EXPECT_GE(kkt_residual(p, EpiPoint(0.5 - s, v1(-0.5 + s)), b, {0.5}), 1e-4);

  // q = p infeasible, zero multipliers: residual is the violation
  Bundle two = single(1.0, -1.0);
  two.add(Cut{v1(0.0), -3.0, v1(0.0)});
  EXPECT_DOUBLE_EQ(kkt_residual(p, p, two, {0.0, 0.0}), 3.0);

  EXPECT_THROW(kkt_residual(p, p, two, {0.0}), UsageError);
}

TEST(ProjectPolyhedronProperty, FeasibleIdempotentNonexpansive) {
  Instances gen(21);
  std::uniform_int_distribution<int> dim(1, 6), cuts(1, 10);
  for (int s = 0; s < 300; ++s) {
    const int n = dim(gen.rng);
    const Bundle b = gen.bundle(n, cuts(gen.rng));
    const EpiPoint p = gen.point(n), r = gen.point(n);
    const PolyProjection qp = project_polyhedron(p, b);
    const PolyProjection qr = project_polyhedron(r, b);
    for (const Cut& c : b.cuts()) EXPECT_LE(cut_violation(c, qp.point), 1e-9);
    EXPECT_LE(kkt_residual(p, qp.point, b, qp.multipliers), 1e-8);
    EXPECT_LE(distance(qp.point, qr.point), distance(p, r) + 1e-9);
    const PolyProjection again = project_polyhedron(qp.point, b);
    EXPECT_LE(distance(again.point, qp.point), 1e-9);
  }
}

TEST(ProjectPolyhedronProperty, AgreesWithGridIn2d) {
  Instances gen(4);
  std::uniform_int_distribution<int> cuts(1, 10);
  for (int s = 0; s < 30; ++s) {
    const Bundle b = gen.bundle(1, cuts(gen.rng));
    const EpiPoint p = gen.point(1);
    const PolyProjection q = project_polyhedron(p, b);
    const verify::GridPolyProjection grid =
        verify::grid_poly_projection(p, b, p.g(0) - 5.0, p.g(0) + 5.0, 1e-3);
    EXPECT_LE(distance(q.point, grid.point), 2e-3);
  }
}
