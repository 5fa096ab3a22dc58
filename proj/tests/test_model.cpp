#include <gtest/gtest.h>

#include "epiconj/model.hpp"

using namespace epiconj;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST(CutViolation, InsideOutsideBoundary) {
  EXPECT_DOUBLE_EQ(cut_violation(Cut{v1(1.0), 0.5, v1(1.0)}, EpiPoint(0.0, v1(0.0))), -0.5);
  EXPECT_DOUBLE_EQ(cut_violation(Cut{v1(0.0), 0.0, v1(0.0)}, EpiPoint(-1.0, v1(0.0))), 1.0);
  const Vector ones = Vector::Ones(2);
  EXPECT_DOUBLE_EQ(cut_violation(Cut{ones, 2.0, ones}, EpiPoint(0.0, ones)), 0.0);
}

TEST(CutViolation, DimensionMismatchThrows) {
  EXPECT_THROW(cut_violation(Cut{Vector::Ones(2), 0.0, Vector::Ones(2)}, EpiPoint(0.0, v1(0.0))),
               UsageError);
}

TEST(CutGraphPoint, FenchelYoungEquality) {
  // f(x) = x^2/2 at x = 1: g = 1, f*(1) = 1/2
  const EpiPoint gp = Cut{v1(1.0), 0.5, v1(1.0)}.graph_point();
  EXPECT_DOUBLE_EQ(gp.mu, 0.5);
  EXPECT_DOUBLE_EQ(gp.g(0), 1.0);
}

TEST(SupportDirection, Examples) {
  const EpiPoint d = support_direction(-1.0, -0.32243, v1(-0.40400));
  EXPECT_NEAR(d.mu, -0.67757, 1e-12);
  EXPECT_NEAR(d.g(0), 0.40400, 1e-12);

  const EpiPoint z = support_direction(0.0, 1.0, Vector::Zero(3));
  EXPECT_DOUBLE_EQ(z.mu, -1.0);
  EXPECT_TRUE(z.g.isZero());

  const EpiPoint u = support_direction(-2.0, -1.0, v1(1.0));
  EXPECT_DOUBLE_EQ(u.mu, -1.0);
  EXPECT_DOUBLE_EQ(u.g(0), -1.0);
}

TEST(SupportDirection, RequiresStrictIncrease) {
  EXPECT_THROW(support_direction(0.0, 0.0, v1(1.0)), ContractViolation);
  EXPECT_THROW(support_direction(0.0, -1.0, v1(1.0)), ContractViolation);
}

TEST(EpiPoint, StackedRoundTrip) {
  const EpiPoint p(1.5, (Vector(3) << 1, -2, 3).finished());
  const EpiPoint q = EpiPoint::from_stacked(p.stacked());
  EXPECT_EQ(q.mu, p.mu);
  EXPECT_EQ(q.g, p.g);
  EXPECT_DOUBLE_EQ(distance(p, q), 0.0);
  EXPECT_DOUBLE_EQ(EpiPoint(3.0, v1(4.0)).norm(), 5.0);
}

TEST(Bundle, EvictsOldestInactive) {
  Bundle b(3);
  for (int i = 0; i < 3; ++i) b.add(Cut{v1(i), static_cast<double>(i), v1(0.0)});
  const std::size_t evicted = b.add(Cut{v1(3.0), 3.0, v1(0.0)}, {true, false, false});
  EXPECT_EQ(evicted, 1u);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].x(0), 0.0);
  EXPECT_EQ(b[1].x(0), 2.0);
  EXPECT_EQ(b[2].x(0), 3.0);
}

TEST(Bundle, AllActiveDropsOldest) {
  Bundle b(2);
  b.add(Cut{v1(0.0), 0.0, v1(0.0)});
  b.add(Cut{v1(1.0), 0.0, v1(0.0)});
  b.add(Cut{v1(2.0), 0.0, v1(0.0)}, {true, true});
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].x(0), 1.0);
}

TEST(Bundle, RejectsBadCuts) {
  EXPECT_THROW(Bundle(0), UsageError);
  Bundle b;
  b.add(Cut{v1(0.0), 0.0, v1(0.0)});
  EXPECT_THROW(b.add(Cut{Vector::Zero(2), 0.0, Vector::Zero(2)}), UsageError);
  EXPECT_THROW(b.add(Cut{v1(0.0), kInf, v1(0.0)}), UsageError);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.eps_g = 0.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = {};
  cfg.max_outer = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  EXPECT_EQ(backend_from_string("cutting"), Backend::cutting);
  EXPECT_THROW(backend_from_string("simplex"), UsageError);
}
