#include "skalg/geometry.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace skalg;
using skalg::testing::loaded;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// One-based indices, as printed in tables.
double gamma(const ChristoffelTensor& t, int a, int b, int c) { return t(a - 1, b - 1, c - 1); }

}  // namespace

TEST(Christoffel, PlanarBodyTable) {
  const auto& d = loaded("planar_body");
  for (const auto& p : d.samples(6, 1)) {
    const ChristoffelTensor t = christoffel(d.algebroid, d.metric, p);
    Tensor3 expected(3);
    expected(0, 1, 1) = 1.0;
    expected(0, 1, 2) = 1.0;
    expected(0, 2, 1) = -1.0;
    expected(0, 2, 2) = -1.0;
    expected(1, 1, 0) = -0.5;
    expected(1, 2, 0) = 0.5;
    expected(2, 1, 0) = -0.5;
    expected(2, 2, 0) = 0.5;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(t(a, b, c), expected(a, b, c), 1e-5) << a << b << c;
  }
}

TEST(Christoffel, PlanarBodyGeneralParameters) {
  SystemSpec spec = builtins::planar_body(2.0, 0.5, 1.5);
  const auto d = load_spec(spec);
  const double m = 2.0, J = 0.5, h = 1.5;
  const ChristoffelTensor t = christoffel(d.algebroid, d.metric, vec({0.1, 0.2, 0.3}));
  EXPECT_NEAR(gamma(t, 1, 2, 2), h / J, 1e-5);
  EXPECT_NEAR(gamma(t, 1, 2, 3), m * h / J, 1e-5);
  EXPECT_NEAR(gamma(t, 1, 3, 2), -1 / h, 1e-5);
  EXPECT_NEAR(gamma(t, 1, 3, 3), -m / h, 1e-5);
  EXPECT_NEAR(gamma(t, 2, 2, 1), -h / (J + m * h * h), 1e-5);
  EXPECT_NEAR(gamma(t, 2, 3, 1), J / (h * (J + m * h * h)), 1e-5);
  EXPECT_NEAR(gamma(t, 3, 2, 1), -h * h * h / (J * (J + m * h * h)), 1e-5);
  EXPECT_NEAR(gamma(t, 3, 3, 1), h / (J + m * h * h), 1e-5);
}

TEST(Christoffel, RoboticLegClosedForms) {
  const auto& d = loaded("robotic_leg");
  const double m = 1.0, J = 1.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ur(0.5, 3.0), ua(-2.0, 2.0);
  for (int k = 0; k < 10; ++k) {
    const double r = ur(rng);
    const ChristoffelTensor t = christoffel(d.algebroid, d.metric, vec({r, ua(rng), ua(rng)}));
    const double den = m * r * (J + m * r * r);
    EXPECT_NEAR(gamma(t, 2, 1, 1), -1 / (m * r * r * r), 1e-5);
    EXPECT_NEAR(gamma(t, 1, 1, 2), J / den, 1e-5);
    EXPECT_NEAR(gamma(t, 3, 1, 2), 1 / den, 1e-5);
    EXPECT_NEAR(gamma(t, 2, 1, 3), -1 / r, 1e-5);
    EXPECT_NEAR(gamma(t, 1, 2, 1), -J / den, 1e-5);
    EXPECT_NEAR(gamma(t, 3, 2, 1), -1 / den, 1e-5);
    EXPECT_NEAR(gamma(t, 1, 2, 3), J * r / (J + m * r * r), 1e-5);
    EXPECT_NEAR(gamma(t, 3, 2, 3), r / (J + m * r * r), 1e-5);
    EXPECT_NEAR(gamma(t, 2, 3, 1), -1 / r, 1e-5);
    EXPECT_NEAR(gamma(t, 1, 3, 2), J * r / (J + m * r * r), 1e-5);
    EXPECT_NEAR(gamma(t, 3, 3, 2), r / (J + m * r * r), 1e-5);
    EXPECT_NEAR(gamma(t, 2, 3, 3), -r * m, 1e-5);
  }
  const ChristoffelTensor at2 = christoffel(d.algebroid, d.metric, vec({2, 0, 0}));
  EXPECT_NEAR(gamma(at2, 2, 1, 1), -0.125, 1e-6);
}

TEST(Christoffel, SuslovFollowsFromStructureConstants) {
  // Constant metric diag(1, 2, 3) with C^3_12 = C^1_23 = C^2_31 = 1.
  const auto& d = loaded("suslov");
  const ChristoffelTensor t = christoffel(d.algebroid, d.metric, BasePoint(0));
  // 2 G(nabla_1 e_2, e_3) = G([e1,e2],e3) - G([e2,e3],e1) + G([e3,e1],e2) = 3 - 1 + 2.
  EXPECT_EQ(d.algebroid.structure(BasePoint(0))(2, 0, 1), 1.0);
  EXPECT_NEAR(gamma(t, 3, 1, 2), 2.0 / 3.0, 1e-9);
  // Antisymmetric part equals the structure constants.
  const Tensor3 c = d.algebroid.structure(BasePoint(0));
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(t(a, b, k) - t(a, k, b), c(a, b, k), 1e-12);
  const ChristoffelTensor zero = christoffel(loaded("suslov_constrained").algebroid,
                                             loaded("suslov_constrained").metric, BasePoint(0));
  EXPECT_EQ(zero.gamma.max_abs(), 0.0);
}

TEST(Christoffel, EuclideanVanishes) {
  const auto& d = loaded("euclidean3");
  const ChristoffelTensor t = christoffel(d.algebroid, d.metric, vec({0.3, -1, 2}));
  EXPECT_LE(t.gamma.max_abs(), 1e-12);
}

TEST(Connection, TorsionFreeAndMetricOnAllSystems) {
  for (const auto& name : skalg::testing::oracle_systems()) {
    const auto& d = loaded(name);
    const auto& s = d.algebroid;
    const Section x = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 1);
    const Section y = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 2);
    const Section z = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 3);
    for (const auto& p : d.samples(8, 5)) {
      const ChristoffelTensor t = christoffel(s, d.metric, p);
      const Tensor3 c = s.structure(p);
      for (std::size_t a = 0; a < d.rank(); ++a)
        for (std::size_t b = 0; b < d.rank(); ++b)
          for (std::size_t k = 0; k < d.rank(); ++k) EXPECT_NEAR(t(a, b, k) - t(a, k, b), c(a, b, k), 1e-9) << name;

      const Vector torsion =
          covariant_derivative(s, d.metric, x, y, p) - covariant_derivative(s, d.metric, y, x, p) - bracket(s, x, y, p);
      EXPECT_LT(max_abs(torsion), 1e-8) << name;

      // rho(X) G(Y, Z) = G(nabla_X Y, Z) + G(Y, nabla_X Z).
      const BundleMetric g = d.metric;
      const ScalarField gyz([g, y, z](const BasePoint& q) { return metric_eval(g, y, z, q); }, g.level());
      const double lhs = anchor_derivative(s, x, gyz, p);
      const double rhs = metric_eval(g, covariant_derivative(s, g, x, y, p), z(p), p) +
                         metric_eval(g, y(p), covariant_derivative(s, g, x, z, p), p);
      EXPECT_NEAR(lhs, rhs, 1e-5) << name;
    }
  }
}

TEST(Connection, KoszulRightSideMatchesChristoffel) {
  const auto& d = loaded("snakeboard");
  for (const auto& p : d.samples(5, 2)) {
    const Tensor3 r = koszul_rhs(d.algebroid, d.metric, p);
    const ChristoffelTensor t = christoffel(d.algebroid, d.metric, p);
    const Matrix gp = d.metric(p);
    for (std::size_t e = 0; e < 3; ++e)
      for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t c = 0; c < 3; ++c) {
          double lowered = 0.0;
          for (std::size_t a = 0; a < 3; ++a) lowered += gp(e, a) * t(a, b, c);
          EXPECT_NEAR(r(e, b, c), 2 * lowered, 1e-9);
        }
  }
}

TEST(Metric, FlatSharpRoundTrip) {
  for (const auto& name : skalg::testing::oracle_systems()) {
    const auto& d = loaded(name);
    for (const auto& p : d.samples(10, 3)) {
      for (const auto& v : sample_fibers(d.rank(), 3, 1)) {
        EXPECT_LT(max_abs(sharp(d.metric, flat(d.metric, v, p), p) - v), 1e-12) << name;
      }
    }
  }
  const auto& e = loaded("euclidean2");
  EXPECT_EQ(flat(e.metric, vec({1, 2}), vec({0, 0})), vec({1, 2}));
}

TEST(Metric, SingularMetricIsReported) {
  const BundleMetric g = BundleMetric::constant(Matrix::Zero(2, 2));
  EXPECT_THROW(sharp(g, vec({1, 0}), vec({0})), SingularMetricError);
  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(1, 1) = -1;
  const MetricDiagnostic strict = check_metric(BundleMetric::constant(indefinite), {vec({0})}, true);
  EXPECT_FALSE(strict.ok);
  EXPECT_TRUE(strict.witness.has_value());
  EXPECT_TRUE(check_metric(BundleMetric::constant(indefinite), {vec({0})}, false).ok);
}

TEST(Metric, LowerTriangleIsIgnored) {
  std::vector<std::vector<Expr>> entries = {{parse("2"), parse("x")}, {parse("99"), parse("3")}};
  const BundleMetric g = BundleMetric::from_expressions(entries, {"x"}, {});
  const Matrix gp = g(vec({0.5}));
  EXPECT_EQ(gp(1, 0), 0.5);
  EXPECT_EQ(gp(0, 1), 0.5);
}

TEST(SymmetricProduct, RoboticLeg) {
  const auto& d = loaded("robotic_leg");
  for (const auto& p : d.samples(10, 4)) {
    const double r = p(0);
    const Vector y11 = symmetric_product(d.algebroid, d.metric, d.section("Y1"), d.section("Y1"), p);
    EXPECT_LT(max_abs(y11 - vec({0, -2 / (r * r * r), 0})), 1e-4);
    EXPECT_LT(max_abs(symmetric_product(d.algebroid, d.metric, d.section("Y1"), d.section("Y2"), p)), 1e-4);
    EXPECT_LT(max_abs(symmetric_product(d.algebroid, d.metric, d.section("Y2"), d.section("Y2"), p)), 1e-4);
  }
}

TEST(SymmetricProduct, PlanarBody) {
  const auto& d = loaded("planar_body");
  for (const auto& p : d.samples(5, 4)) {
    const Vector y22 = symmetric_product(d.algebroid, d.metric, d.section("Y2"), d.section("Y2"), p);
    EXPECT_LT(max_abs(y22 - vec({2, 0, 0})), 1e-4);
    const Vector y12 = symmetric_product(d.algebroid, d.metric, d.section("Y1"), d.section("Y2"), p);
    EXPECT_LT(max_abs(y12 - vec({0, -0.5, -0.5})), 1e-4);
  }
}

TEST(SymmetricProduct, SnakeboardAgainstSymbolicExpansion) {
  const auto& d = loaded("snakeboard");
  for (const auto& p : d.samples(10, 6)) {
    const double phi = p(4);
    const double s2 = std::sin(phi) * std::sin(phi);
    const double c2 = std::cos(phi) * std::cos(phi);
    const Vector x23 = symmetric_product(d.algebroid, d.metric, d.section("X2"), d.section("X3"), p);
    const Vector expected =
        vec({std::cos(phi) / ((s2 + 2) * (s2 + 2)), -std::sin(2 * phi) / (c2 * c2 - 8 * c2 + 15), 0.0});
    EXPECT_LT(max_abs(x23 - expected), 1e-4);
    EXPECT_LT(max_abs(symmetric_product(d.algebroid, d.metric, d.section("X3"), d.section("X3"), p)), 1e-4);
    const Vector x22 = symmetric_product(d.algebroid, d.metric, d.section("X2"), d.section("X2"), p);
    EXPECT_LT(std::abs(x22(0)), 1e-4);
  }
}

TEST(SymmetricProduct, AgreesWithVerticalLiftDoubleBracket) {
  for (const auto& name : skalg::testing::oracle_systems()) {
    const auto& d = loaded(name);
    const Section x = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 4);
    const Section y = skalg::testing::wiggly_section(d.base_dim(), d.rank(), 5);
    const auto fibers = sample_fibers(d.rank(), 20, 9);
    const auto points = d.samples(20, 9);
    for (std::size_t k = 0; k < points.size(); ++k) {
      const Vector direct = symmetric_product(d.algebroid, d.metric, x, y, points[k]);
      const Vector lifted = symprod_via_lifts(d.algebroid, d.metric, x, y, points[k], fibers[k]);
      EXPECT_LT(max_abs(direct - lifted), 1e-3) << name;
    }
  }
}

TEST(SymmetricProduct, IsSymmetricAndMatchesConnection) {
  const auto& d = loaded("robotic_leg");
  const Section x = skalg::testing::wiggly_section(3, 3, 1);
  const Section y = skalg::testing::wiggly_section(3, 3, 2);
  for (const auto& p : d.samples(5, 0)) {
    const Vector a = symmetric_product(d.algebroid, d.metric, x, y, p);
    EXPECT_LT(max_abs(a - symmetric_product(d.algebroid, d.metric, y, x, p)), 1e-12);
    const Vector b =
        covariant_derivative(d.algebroid, d.metric, x, y, p) + covariant_derivative(d.algebroid, d.metric, y, x, p);
    EXPECT_LT(max_abs(a - b), 1e-12);
  }
}

TEST(Gradient, SharpOfAlmostDifferential) {
  const auto& d = loaded("planar_body");
  const ScalarField v([](const BasePoint& x) { return x(1); });
  const BasePoint p = vec({0.1, 0.2, 0.0});
  // d^D y = (0, 1, 1) at theta = 0; sharp divides by the metric diag(1, 2, 2).
  const Vector grad = gradient(d.algebroid, d.metric, v, p);
  EXPECT_LT(max_abs(grad - vec({0, 0.5, 0.5})), 1e-8);
  EXPECT_LE(max_abs(gradient(d.algebroid, d.metric, ScalarField::constant(3), p)), 0.0);
}

TEST(Christoffel, IntrinsicSnakeboardDocumentMatchesEmbeddedConstruction) {
  const auto intrinsic = load_spec_file(skalg::testing::data_path("snakeboard_intrinsic.json"));
  const auto& embedded = loaded("snakeboard");
  for (const auto& p : embedded.samples(20, 11)) {
    const ChristoffelTensor a = christoffel(intrinsic.algebroid, intrinsic.metric, p);
    const ChristoffelTensor b = christoffel(embedded.algebroid, embedded.metric, p);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a(i, j, k), b(i, j, k), 1e-4);
  }
}

TEST(CovariantDerivativeAlong, VanishesOnGeodesic) {
  const auto& d = loaded("planar_body");
  const TotalPoint q0{vec({0, 0, 0}), vec({0.3, -0.2, 0.5})};
  const Trajectory gamma = integrate_forced(d.algebroid, d.metric, ForceField::zero(3), q0, 0.0, 1.0, 1e-3);
  for (std::size_t k = 1; k + 1 < gamma.size(); k += 97) {
    EXPECT_LT(max_abs(covariant_derivative_along(d.algebroid, d.metric, gamma, gamma.fiber, k)), 1e-5);
  }
}
