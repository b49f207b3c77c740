#include "skalg/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

using namespace skalg;

namespace {

const std::vector<std::string> kCorpus = {
    "m*r^2",
    "sin(theta)^2 + cos(theta)^2",
    "J/(h*(J+m*h^2))",
    "-x^2",
    "2^3^2",
    "-(a - b) * -c",
    "atan2(y, x) + abs(-3) - sqrt(4)",
    "exp(ln(2)) / tan(0.5)",
    "1e-3 + 2.5E+2 - .5",
    "((x))",
    "a - (b - c) - d",
    "a / (b / c) / d",
    "(a^b)^c",
    "-2^2",
    "+x - -y",
    "h^3/((J + m*h^2)*J)",
    "4*sin(2*phi)/(cos(2*phi)^2 - 14*cos(2*phi) + 45)",
};

}  // namespace

TEST(ExprParse, AcceptsArithmeticWithNothingBound) {
  EXPECT_NO_THROW(parse("m*r^2"));
  EXPECT_NO_THROW(parse("sin(theta)^2 + cos(theta)^2"));
}

TEST(ExprParse, UnbalancedParenthesisReportsOffset) {
  try {
    parse("2*(x +");
    FAIL() << "expected a syntax error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 6u);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(ExprParse, UnknownFunctionIsRejected) { EXPECT_THROW(parse("sinh(x)"), ParseError); }

TEST(ExprParse, RejectsTrailingGarbageAndEmptyInput) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("x y"), ParseError);
  EXPECT_THROW(parse("3 +* 4"), ParseError);
  EXPECT_THROW(parse("atan2(1)"), ParseError);
  EXPECT_THROW(parse("sin(1, 2)"), ParseError);
}

TEST(ExprParse, PowerIsRightAssociativeAndBindsTighterThanNegation) {
  EXPECT_DOUBLE_EQ(eval(parse("2^3^2"), {}), 512.0);
  EXPECT_DOUBLE_EQ(eval(parse("-2^2"), {}), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("2^-1"), {}), 0.5);
  EXPECT_DOUBLE_EQ(eval(parse("a - b - c"), {{"a", 1}, {"b", 2}, {"c", 3}}), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("a / b / c"), {{"a", 8}, {"b", 2}, {"c", 2}}), 2.0);
}

TEST(ExprParse, RoundTripThroughPrinterIsStructural) {
  for (const auto& s : kCorpus) {
    const Expr e = parse(s);
    const Expr again = parse(print(e));
    EXPECT_TRUE(e.structurally_equal(again)) << s << " printed as " << print(e);
  }
}

TEST(ExprParse, FreeVariables) {
  const auto v = parse("m*r^2 + sin(theta) - J").free_variables();
  EXPECT_EQ(v, (std::set<std::string>{"J", "m", "r", "theta"}));
  EXPECT_TRUE(parse("2*3 + sin(1)").free_variables().empty());
  EXPECT_TRUE(parse("2.5").is_constant());
  EXPECT_FALSE(parse("x").is_constant());
}

TEST(ExprEval, Examples) {
  EXPECT_DOUBLE_EQ(eval(parse("m*r^2"), {{"m", 1}, {"r", 2}}), 4.0);
  EXPECT_DOUBLE_EQ(eval(parse("sin(theta)"), {{"theta", 0}}), 0.0);
  EXPECT_DOUBLE_EQ(eval(parse("J/(h*(J+m*h^2))"), {{"J", 1}, {"h", 1}, {"m", 1}}), 0.5);
  EXPECT_DOUBLE_EQ(eval(parse("atan2(1, 1)"), {}), std::atan2(1.0, 1.0));
}

TEST(ExprEval, ErrorsAreReportedNotNaN) {
  EXPECT_THROW(eval(parse("x + 1"), {}), EvalError);
  EXPECT_THROW(eval(parse("1/x"), {{"x", 0}}), EvalError);
  EXPECT_THROW(eval(parse("ln(x)"), {{"x", 0}}), EvalError);
  EXPECT_THROW(eval(parse("ln(x)"), {{"x", -1}}), EvalError);
  EXPECT_THROW(eval(parse("sqrt(x)"), {{"x", -1}}), EvalError);
  EXPECT_THROW(eval(parse("exp(x)"), {{"x", 1e6}}), EvalError);
}

TEST(ExprEval, IsPureAcrossThreads) {
  const Expr e = parse("sin(x)*cos(y) + x^2/(1 + y^2)");
  const double expected = eval(e, {{"x", 0.3}, {"y", -1.2}});
  std::vector<std::thread> pool;
  std::vector<double> got(8);
  for (std::size_t i = 0; i < got.size(); ++i) {
    pool.emplace_back([&, i] {
      double v = 0;
      for (int k = 0; k < 1000; ++k) v = eval(e, {{"x", 0.3}, {"y", -1.2}});
      got[i] = v;
    });
  }
  for (auto& t : pool) t.join();
  for (double v : got) EXPECT_EQ(v, expected);
}

TEST(ExprPartial, Examples) {
  EXPECT_NEAR(partial(parse("x^2"), "x", {{"x", 3}}, 1e-5), 6.0, 1e-8);
  EXPECT_NEAR(partial(parse("sin(theta)"), "theta", {{"theta", 0}}, 1e-5), 1.0, 1e-8);
  // d/dr r^3 = 3 r^2.
  EXPECT_NEAR(partial(parse("r^3"), "r", {{"r", 2}}, 1e-5), 12.0, 1e-6);
}

TEST(ExprPartial, RequiresPositiveStepAndBoundVariable) {
  EXPECT_THROW(partial(parse("x"), "x", {{"x", 1}}, 0.0), EvalError);
  EXPECT_THROW(partial(parse("x"), "y", {{"x", 1}}, 1e-5), EvalError);
  EXPECT_THROW(partial(parse("ln(x)"), "x", {{"x", 0}}, 1e-5), EvalError);
}

TEST(ExprPartial, LinearityOnRandomInputs) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  const Expr e1 = parse("sin(x)*y + x^3");
  const Expr e2 = parse("exp(x/3) - cos(x*y)");
  for (int k = 0; k < 50; ++k) {
    const double a = u(rng), b = u(rng);
    const Bindings bind{{"x", u(rng)}, {"y", u(rng)}, {"a", a}, {"b", b}};
    const Expr combo = parse("a*(sin(x)*y + x^3) + b*(exp(x/3) - cos(x*y))");
    const double lhs = partial(combo, "x", bind, 1e-5);
    const double rhs = a * partial(e1, "x", bind, 1e-5) + b * partial(e2, "x", bind, 1e-5);
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(ExprPartial, ProductRuleOnRandomPolynomials) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 30; ++k) {
    const double c[6] = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    char p[128], q[128], pq[300];
    std::snprintf(p, sizeof p, "(%.6f + %.6f*x + %.6f*x^2)", c[0], c[1], c[2]);
    std::snprintf(q, sizeof q, "(%.6f + %.6f*x + %.6f*x^3)", c[3], c[4], c[5]);
    std::snprintf(pq, sizeof pq, "%s*%s", p, q);
    const Bindings b{{"x", u(rng)}};
    const double h = 1e-4;
    const double lhs = partial(parse(pq), "x", b, h);
    const double rhs = partial(parse(p), "x", b, h) * eval(parse(q), b) + eval(parse(p), b) * partial(parse(q), "x", b, h);
    EXPECT_NEAR(lhs, rhs, 1e-6);
  }
}

TEST(BoundExpr, MatchesTreeWalkAndFoldsConstants) {
  const std::vector<std::string> slots = {"r", "theta", "psi"};
  const Bindings params{{"m", 2.0}, {"J", 3.0}};
  const Expr e = parse("2*J/(m*r*(J + m*r^2)) + sin(theta - psi)");
  const BoundExpr b(e, slots, params);
  const std::vector<double> x = {1.3, 0.4, -0.2};
  Bindings all = params;
  all["r"] = x[0];
  all["theta"] = x[1];
  all["psi"] = x[2];
  EXPECT_DOUBLE_EQ(b(x), eval(e, all));
  EXPECT_TRUE(BoundExpr(parse("m*J + 1"), slots, params).is_constant());
  EXPECT_THROW(BoundExpr(parse("q + 1"), slots, params), EvalError);
}
