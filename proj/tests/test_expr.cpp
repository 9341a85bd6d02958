#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "dissipative/builtin.hpp"
#include "dissipative/expr.hpp"
#include "support/oracles.hpp"

using namespace dissipative;

namespace {

std::vector<double> central_difference(const ScalarField& f, std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST(Parse, WellFormed) {
  EXPECT_NO_THROW(ScalarField::parse("x^2+y^2-1", 3));
  EXPECT_NO_THROW(ScalarField::parse("-(1+x^2)", 3));
  EXPECT_NO_THROW(ScalarField::parse("x1*x4 - sqrt(x2^2 + 1)", 4));
}

TEST(Parse, SyntaxErrorOffset) {
  try {
    ScalarField::parse("x^^2", 3);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Parse, Rejections) {
  EXPECT_THROW(ScalarField::parse("", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("w+1", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("foo(x)", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("x4", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("y", 2), ParseError);  // aliases only in R^3
  EXPECT_THROW(ScalarField::parse("x^y", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("x^1.5", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("(x+1", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("x+", 3), ParseError);
  EXPECT_THROW(ScalarField::parse("sin(x, y)", 3), ParseError);
}

TEST(Parse, PrecedenceAndAssociativity) {
  std::vector<double> p{2.0, 3.0, 0.0};
  EXPECT_DOUBLE_EQ(ScalarField::parse("-x^2", 3)(p), -4.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("2^3^2", 3)(p), 512.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("8/2/2", 3)(p), 2.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("8-2-2", 3)(p), 4.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("1+2*3", 3)(p), 7.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("x^-1", 3)(p), 0.5);
  EXPECT_DOUBLE_EQ(ScalarField::parse("(-x)^3", 3)(p), -8.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("2.5e1", 3)(p), 25.0);
}

TEST(Eval, Examples) {
  EXPECT_DOUBLE_EQ(ScalarField::parse("x^2+y^2-1", 3)(std::vector<double>{1, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(ScalarField::parse("z", 3)(std::vector<double>{0.3, 0, -2}), -2.0);
  EXPECT_NEAR(ScalarField::parse("sin(x*y)", 3)(std::vector<double>{std::numbers::pi, 1, 0}), 0.0,
              1e-15);
}

TEST(Eval, DomainErrors) {
  std::vector<double> p{0.0, -1.0, 0.0};
  EXPECT_THROW(ScalarField::parse("1/x", 3)(p), DomainError);
  EXPECT_THROW(ScalarField::parse("sqrt(y)", 3)(p), DomainError);
  EXPECT_THROW(ScalarField::parse("x^-2", 3)(p), DomainError);
  EXPECT_THROW(ScalarField::parse("x", 3)(std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(Gradient, Examples) {
  auto g = ScalarField::parse("x^2+y^2-1", 3).gradient(std::vector<double>{1, 2, 0});
  EXPECT_EQ(g, (std::vector<double>{2, 4, 0}));
  auto gz = ScalarField::parse("z", 3).gradient(std::vector<double>{0.4, -7, 3});
  EXPECT_EQ(gz, (std::vector<double>{0, 0, 1}));
  const auto f = ScalarField::parse("sin(x*y)", 3);
  std::vector<double> p{0.7, -1.1, 0.0};
  const auto exact = f.gradient(p);
  const auto fd = central_difference(f, p, 1e-5);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(exact[i], fd[i], 1e-6);
}

TEST(Gradient, MatchesFiniteDifferencesOnBuiltinFields) {
  std::vector<ScalarField> fields;
  for (const auto& name : builtin_names()) {
    auto sc = builtin_scenario(name, ScalarField::parse("-(1+x^2)", 3));
    for (const auto& f : sc.system.conserved()) fields.push_back(f);
    for (const auto& f : sc.system.dissipated()) fields.push_back(f);
    for (const auto& f : sc.system.rates()) fields.push_back(f);
    for (const auto& f : *sc.system.base_field()) fields.push_back(f);
  }
  fields.push_back(ScalarField::parse("exp(x)*tanh(y) - cos(z)/(2+sin(x*z))", 3));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const auto& f : fields) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> p{d(rng), d(rng), d(rng)};
      const auto exact = f.gradient(p);
      const auto fd = central_difference(f, p, 1e-5);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(exact[i], fd[i], 1e-6) << f.source();
    }
  }
}

TEST(Print, RoundTrip) {
  const char* sources[] = {"x^2+y^2-1",         "-(1+x^2)",        "sin(x*y)-z/3",
                           "2^3^2*x-y^-2",       "sqrt(1+x^2)*exp(-y)", "tanh(z)*cos(x)+0.1"};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const char* s : sources) {
    const auto f = ScalarField::parse(s, 3);
    const auto g = ScalarField::parse(f.print(), 3);
    EXPECT_EQ(g.print(), f.print());
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> p{d(rng), d(rng), d(rng)};
      const double a = f(p), b = g(p);
      EXPECT_NEAR(a, b, 1e-15 * std::max(1.0, std::abs(a))) << s;
    }
  }
}

TEST(Print, ConstantsRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) {
    EXPECT_EQ(ScalarField::constant(v, 2)(std::vector<double>{0, 0}), v);
  }
}
