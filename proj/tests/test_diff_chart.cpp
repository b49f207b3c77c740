#include "skalg/chart.hpp"
#include "skalg/diff.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace skalg;

TEST(Diff, DirectionalDerivativeOfSmoothFunction) {
  auto f = [](const Vector& x) { return std::sin(x(0)) * x(1); };
  Vector x(2);
  x << 0.7, 2.0;
  Vector v(2);
  v << 1.0, -1.0;
  const double expected = std::cos(0.7) * 2.0 - std::sin(0.7);
  EXPECT_NEAR(directional(f, x, v, 0), expected, 1e-8);
  EXPECT_EQ(directional(f, x, Vector::Zero(2), 0), 0.0);
}

TEST(Diff, JacobianOfLinearMapIsExact) {
  Matrix a(2, 3);
  a << 1, 2, 3, -1, 0.5, 4;
  auto f = [&](const Vector& x) { return Vector(a * x); };
  const Matrix j = jacobian(f, Vector::Ones(3), 0);
  EXPECT_LT((j - a).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Diff, StepsGrowWithLevelAndScaleWithPoint) {
  EXPECT_DOUBLE_EQ(fd_step(0), fd_settings().base_step);
  for (int k = 1; k < 4; ++k) EXPECT_GT(fd_step(k), fd_step(k - 1));
  Vector big(2);
  big << 10.0, -40.0;
  EXPECT_DOUBLE_EQ(scaled_step(0, big), 40.0 * fd_step(0));
  EXPECT_DOUBLE_EQ(scaled_step(1, Vector::Constant(2, 0.1)), fd_step(1));
}

TEST(Diff, LieBracketOfPlanarFields) {
  // [x d/dy, d/dx] = -d/dy.
  auto u = [](const Vector& x) {
    Vector v(2);
    v << 0.0, x(0);
    return v;
  };
  auto w = [](const Vector&) {
    Vector v(2);
    v << 1.0, 0.0;
    return v;
  };
  Vector p(2);
  p << 0.3, -0.8;
  const Vector b = lie_bracket(u, 0, w, 0, p);
  EXPECT_NEAR(b(0), 0.0, 1e-9);
  EXPECT_NEAR(b(1), -1.0, 1e-9);
  const Vector back = lie_bracket(w, 0, u, 0, p);
  EXPECT_LT((b + back).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Chart, SamplesStayInBoxAndAreReproducible) {
  Chart c;
  c.coordinates = {"a", "b", "c"};
  c.lower = Vector::Constant(3, -2.0);
  c.upper = Vector::Constant(3, 1.0);
  const auto s1 = sample_points(c, 64, 5);
  const auto s2 = sample_points(c, 64, 5);
  const auto s3 = sample_points(c, 64, 6);
  ASSERT_EQ(s1.size(), 64u);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_TRUE(c.in_box(s1[i]));
    EXPECT_EQ(s1[i], s2[i]);
  }
  EXPECT_NE(s1[0], s3[0]);
}

TEST(Chart, SamplerAvoidsExclusionZones) {
  Chart c;
  c.coordinates = {"x", "phi"};
  c.lower = Vector::Constant(2, -3.0);
  c.upper = Vector::Constant(2, 3.0);
  const double half_pi = std::acos(0.0);
  c.exclusions = {{1, half_pi, 0.1}, {1, -half_pi, 0.1}};
  const auto s = sample_points(c, 500, 0);
  ASSERT_EQ(s.size(), 500u);
  for (const auto& p : s) {
    EXPECT_GE(std::abs(p(1) - half_pi), 0.1);
    EXPECT_GE(std::abs(p(1) + half_pi), 0.1);
    EXPECT_TRUE(c.admissible(p));
  }
  Vector bad(2);
  bad << 0.0, half_pi + 0.05;
  EXPECT_FALSE(c.admissible(bad));
  EXPECT_LT(c.exclusion_clearance(bad), 0.0);
}

TEST(Chart, UnitBoxAndFiberSamples) {
  const Chart c = Chart::unit_box({"u", "v"});
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_TRUE(c.in_box(Vector::Zero(2)));
  EXPECT_FALSE(c.in_box(Vector::Constant(2, 1.5)));
  EXPECT_TRUE(std::isinf(c.exclusion_clearance(Vector::Zero(2))));
  const auto f = sample_fibers(4, 10, 3);
  ASSERT_EQ(f.size(), 10u);
  for (const auto& y : f) EXPECT_NEAR(y.norm(), 1.0, 1e-12);
  EXPECT_EQ(sample_fibers(4, 10, 3)[7], f[7]);
}
