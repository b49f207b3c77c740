#include "skalg/algebroid.hpp"
#include "skalg/dynamics.hpp"
#include "skalg/geometry.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace skalg;
using skalg::testing::loaded;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Section coefficient_section(std::vector<std::string> coeffs, const SystemDefinition& d) {
  std::vector<Expr> e;
  for (const auto& c : coeffs) e.push_back(parse(c));
  return expression_section(e, d.spec.base, d.parameters);
}

}  // namespace

TEST(Bracket, PlanarBodyFrameCoefficients) {
  const auto& d = loaded("planar_body");
  for (double theta : {0.0, 0.7, -2.1}) {
    const BasePoint p = vec({0.4, -0.3, theta});
    const Vector b12 = bracket(d.algebroid, d.section("Y1"), d.section("Y2"), p);
    EXPECT_LT((b12 - vec({0, 0.5, 0.5})).cwiseAbs().maxCoeff(), 1e-6);
    const Vector b23 = bracket(d.algebroid, d.section("Y2"), d.section("Y3"), p);
    EXPECT_LT((b23 - vec({2, 0, 0})).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(bracket(d.algebroid, d.section("Y2"), d.section("Y2"), p).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Bracket, EmbeddedPlanarBodyReproducesFrameBrackets) {
  const auto& intrinsic = loaded("planar_body");
  const auto& embedded = loaded("planar_body_embedded");
  for (const auto& p : intrinsic.samples(10, 4)) {
    const Tensor3 a = intrinsic.algebroid.structure(p);
    const Tensor3 b = embedded.algebroid.structure(p);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a(i, j, k), b(i, j, k), 1e-5);
  }
}

TEST(Bracket, AntisymmetryAtManyPoints) {
  for (const std::string name : {"planar_body", "robotic_leg", "snakeboard"}) {
    const auto& d = loaded(name);
    const Section x = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 1);
    const Section y = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 2);
    for (const auto& p : d.samples(100, 9)) {
      const Vector s = bracket(d.algebroid, x, y, p) + bracket(d.algebroid, y, x, p);
      EXPECT_LE(s.cwiseAbs().maxCoeff(), 1e-12) << name;
    }
  }
}

TEST(Bracket, LeibnizRule) {
  for (const std::string name : {"planar_body", "robotic_leg", "snakeboard", "euclidean3"}) {
    const auto& d = loaded(name);
    const Section x = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 3);
    const Section y = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 4);
    const ScalarField f = skalg::testing::wiggly_function(d.base_dim(), 5);
    const Section fy = f * y;
    for (const auto& p : d.samples(20, 2)) {
      const Vector lhs = bracket(d.algebroid, x, fy, p);
      const Vector rhs = f(p) * bracket(d.algebroid, x, y, p) + anchor_derivative(d.algebroid, x, f, p) * y(p);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-5) << name;
    }
  }
}

TEST(Anchor, Examples) {
  const auto& e = loaded("euclidean2");
  EXPECT_LT((anchor_apply(e.algebroid, Section::basis(2, 0), vec({3, -1})) - vec({1, 0})).norm(), 1e-15);
  const auto& d = loaded("planar_body");
  EXPECT_LT((anchor_apply(d.algebroid, d.section("Y1"), vec({0.5, 2, 0})) - vec({1, 0, 0})).norm(), 1e-15);
  EXPECT_EQ(anchor_apply(d.algebroid, Section::zero(3), vec({0.5, 2, 1})).norm(), 0.0);
  EXPECT_EQ(anchored(d.algebroid, d.section("Y2"))(vec({0, 0, 0})), vec({0, 1, -1}));
}

TEST(AlmostDifferential, FunctionExamples) {
  const auto& e = loaded("euclidean3");
  const ScalarField x1([](const BasePoint& x) { return x(0); });
  EXPECT_LT((d_function(e.algebroid, x1, vec({0.2, 0.3, 0.4})) - vec({1, 0, 0})).norm(), 1e-9);

  const auto& leg = loaded("robotic_leg");
  const ScalarField r([](const BasePoint& x) { return x(0); });
  const Vector dr = d_function(leg.algebroid, r, vec({1.5, 0.2, -0.4}));
  EXPECT_NEAR(dr(1), 1.0, 1e-9);  // 1/m with m = 1
  EXPECT_NEAR(dr(0), 0.0, 1e-12);

  for (const std::string name : {"planar_body", "snakeboard", "robotic_leg"}) {
    const auto& d = loaded(name);
    for (const auto& p : d.samples(5, 1)) {
      EXPECT_EQ(d_function(d.algebroid, ScalarField::constant(2.5), p).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(AlmostDifferential, SquaresToZeroOnTangentBundles) {
  for (const auto& name : skalg::testing::tm_systems()) {
    const auto& d = loaded(name);
    const ScalarField f = skalg::testing::wiggly_function(d.base_dim(), 2);
    const auto& s = d.algebroid;
    const OneForm df(d.rank(), [s, f](const BasePoint& x) { return d_function(s, f, x); }, f.level() + 1);
    const Section x = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 6);
    const Section y = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 7);
    for (const auto& p : d.samples(10, 3)) {
      EXPECT_LT(std::abs(d_oneform(s, df, x, y, p)), 1e-5) << name;
      EXPECT_NEAR(d_oneform(s, df, x, y, p), -d_oneform(s, df, y, x, p), 1e-14);
    }
  }
}

TEST(AlmostDifferential, SnakeboardOneFormMatchesSymbolicValue) {
  // kappa = flat(X1), evaluated on (e2, e3); reference from a symbolic
  // expansion of the same almost-differential formula.
  const auto& d = loaded("snakeboard");
  const BundleMetric g = d.metric;
  const OneForm kappa(3, [g](const BasePoint& x) { return Vector(g(x).col(0)); }, g.level());
  const BasePoint p = vec({0.3, -0.2, 0.5, 0.1, 0.7});
  const double value = d_oneform(d.algebroid, kappa, d.section("X2"), d.section("X3"), p);
  EXPECT_NEAR(value, 0.63340537003613306, 1e-4);
}

TEST(Jacobiator, VanishesOnLieAlgebroids) {
  for (const auto& name : skalg::testing::tm_systems()) {
    const auto& d = loaded(name);
    const Section x = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 1);
    const Section y = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 2);
    const Section z = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 3);
    for (const auto& p : d.samples(5, 8)) {
      EXPECT_LE(jacobiator(d.algebroid, x, y, z, p).cwiseAbs().maxCoeff(), 1e-4) << name;
    }
  }
  const auto& so3 = loaded("suslov");
  const auto b = basis_sections(3);
  EXPECT_LE(jacobiator(so3.algebroid, b[0], b[1], b[2], BasePoint(0)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Jacobiator, SnakeboardMatchesSymbolicValue) {
  // Symbolic reference for X = e1, Y = e2 + x e3, Z = phi e1 + cos(theta) e3.
  const auto& d = loaded("snakeboard");
  const Section x = Section::basis(3, 0);
  const Section y = coefficient_section({"0", "1", "x"}, d);
  const Section z = coefficient_section({"phi", "0", "cos(theta)"}, d);
  const BasePoint p = vec({0.3, -0.2, 0.5, 0.1, 0.7});
  const Vector j = jacobiator(d.algebroid, x, y, z, p);
  EXPECT_LT((j - vec({0, 0, -0.66154834828004550})).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Admissibility, Examples) {
  const auto& d = loaded("planar_body");
  const double h = 1e-2;
  const Trajectory sigma = base_flow(d.algebroid, d.section("fY1"), vec({0.1, 0.2, 0.3}), 0.0, 1.0, h);
  const Trajectory gamma = lift(d.section("fY1"), sigma);
  EXPECT_LT(admissibility_residual(d.algebroid, gamma), 10 * h * h);

  Trajectory still;
  for (int k = 0; k < 5; ++k) still.append(0.1 * k, vec({0, 0, 0}), vec({1, 0, 0}));
  EXPECT_GT(admissibility_residual(d.algebroid, still), 0.5);

  Trajectory rest;
  for (int k = 0; k < 5; ++k) rest.append(0.1 * k, vec({0, 0, 0}), vec({0, 0, 0}));
  EXPECT_EQ(admissibility_residual(d.algebroid, rest), 0.0);
}

TEST(Trajectory, AppendRequiresIncreasingTimeAndFixedDimensions) {
  Trajectory t;
  t.append(0.0, vec({0}), vec({1, 2}));
  EXPECT_THROW(t.append(0.0, vec({0}), vec({1, 2})), std::invalid_argument);
  EXPECT_THROW(t.append(1.0, vec({0, 1}), vec({1, 2})), std::invalid_argument);
  EXPECT_THROW(t.append(1.0, vec({0}), vec({1})), std::invalid_argument);
  EXPECT_NO_THROW(t.append(1.0, vec({3}), vec({1, 2})));
  EXPECT_EQ(t.size(), 2u);
}

TEST(LieClosure, Examples) {
  const auto& e = loaded("euclidean3");
  EXPECT_EQ(lie_closure_rank(e.algebroid, vec({0.1, 0.2, 0.3}), 1), 3u);

  const auto& d = loaded("planar_body");
  const std::vector<BaseVectorField> inputs = {anchored(d.algebroid, d.section("Y1")),
                                               anchored(d.algebroid, d.section("Y2"))};
  for (const auto& p : d.samples(5, 0)) {
    EXPECT_EQ(lie_closure_rank(inputs, p, 1), 2u);
    EXPECT_EQ(lie_closure_rank(inputs, p, 2), 3u);
  }
  EXPECT_EQ(lie_closure_rank(loaded("suslov").algebroid, BasePoint(0), 2), 0u);
  EXPECT_THROW(lie_closure_rank(e.algebroid, vec({0, 0, 0}), 0), std::invalid_argument);
}

TEST(NumericalRank, ThresholdIsRelative) {
  Matrix m = Matrix::Identity(3, 3);
  m(2, 2) = 1e-10;
  EXPECT_EQ(numerical_rank(m), 2u);
  m(2, 2) = 1e-6;
  EXPECT_EQ(numerical_rank(m), 3u);
  EXPECT_EQ(numerical_rank(Matrix::Zero(2, 2)), 0u);
}

TEST(FromExpressions, AntisymmetryRule) {
  const std::vector<std::string> coords = {"x"};
  const std::vector<std::vector<Expr>> anchor = {{parse("1")}, {parse("0")}};
  // Upper triangle only: lower filled by antisymmetry.
  auto s = Algebroid::from_expressions(coords, 2, anchor, {{0, 0, 1, parse("x")}}, {});
  EXPECT_DOUBLE_EQ(s.structure(vec({2}))(0, 1, 0), -2.0);
  // Lower triangle only.
  s = Algebroid::from_expressions(coords, 2, anchor, {{1, 1, 0, parse("x")}}, {});
  EXPECT_DOUBLE_EQ(s.structure(vec({2}))(1, 0, 1), -2.0);
  // Both, consistent.
  EXPECT_NO_THROW(
      Algebroid::from_expressions(coords, 2, anchor, {{0, 0, 1, parse("x")}, {0, 1, 0, parse("-x")}}, {}));
  // Both, inconsistent.
  EXPECT_THROW(
      Algebroid::from_expressions(coords, 2, anchor, {{0, 0, 1, parse("x")}, {0, 1, 0, parse("x")}}, {}),
      std::invalid_argument);
  EXPECT_THROW(Algebroid::from_expressions(coords, 2, anchor, {{0, 1, 1, parse("1")}}, {}), std::invalid_argument);
  EXPECT_THROW(
      Algebroid::from_expressions(coords, 2, anchor, {{0, 0, 1, parse("1")}, {0, 0, 1, parse("1")}}, {}),
      std::invalid_argument);
}

TEST(PointBase, SuslovBracketIsProjected) {
  const auto& full = loaded("suslov");
  const auto b = basis_sections(3);
  EXPECT_EQ(bracket(full.algebroid, b[0], b[1], BasePoint(0)), vec({0, 0, 1}));
  EXPECT_EQ(bracket(full.algebroid, b[2], b[0], BasePoint(0)), vec({0, 1, 0}));
  const auto& constrained = loaded("suslov_constrained");
  EXPECT_EQ(bracket(constrained.algebroid, Section::basis(2, 0), Section::basis(2, 1), BasePoint(0)), vec({0, 0}));
  EXPECT_EQ(full.algebroid.anchor(BasePoint(0)).rows(), 0);
  EXPECT_EQ(full.algebroid.anchor(BasePoint(0)).cols(), 3);
}
