#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "kmsnorm/quadrature.hpp"
#include "kmsnorm/specfun.hpp"
#include "kmsnorm/summation.hpp"

using namespace kmsnorm;

TEST(Integrate, Linear) { EXPECT_NEAR(integrate([](double u) { return u; }, 0.0, 1.0), 0.5, 1e-15); }

TEST(Integrate, DilogDefinition) {
  const double v = integrate([](double u) { return -std::log1p(-u) / u; }, 0.0, 0.5);
  EXPECT_NEAR(v, 0.58224052646501250590, 1e-13);
  EXPECT_NEAR(v, dilog(0.5), 1e-13);
}

// The closed form is -(Li2(0.25) + log^2 0.5) / 2 = -0.374052826500467...
TEST(Integrate, RemovableEndpointSingularities) {
  const double v = integrate([](double u) { return std::log1p(-0.5 * u) / (u * (1.0 - u)); }, 0.0, 0.5);
  EXPECT_NEAR(v, -0.37405282650046701579, 1e-12);
  const double l = std::log(0.5);
  EXPECT_NEAR(v, -0.5 * (dilog(0.25) + l * l), 1e-12);
}

TEST(Integrate, ReversedAndEmptyIntervals) {
  auto f = [](double u) { return std::exp(u); };
  EXPECT_NEAR(integrate(f, 1.0, 0.0), -(std::exp(1.0) - 1.0), 1e-14);
  EXPECT_EQ(integrate(f, 0.3, 0.3), 0.0);
}

TEST(Integrate, MeetsRequestedTolerance) {
  // sharply peaked integrand: int_{-1}^{1} 1 / (1e-4 + x^2) = 2 atan(100) / 1e-2
  auto f = [](double x) { return 1.0 / (1e-4 + x * x); };
  const double exact = 2.0 * std::atan(100.0) / 1e-2;
  const QuadratureSpec spec{1e-10, 1e-12, 2000};
  EXPECT_NEAR(integrate(f, -1.0, 1.0, spec), exact, std::max(spec.abs_tol, spec.rel_tol * exact) * 10);
}

TEST(Integrate, BudgetExhaustionThrows) {
  auto f = [](double x) { return std::sin(200.0 * x); };
  try {
    integrate(f, 0.0, 10.0, QuadratureSpec{1e-15, 1e-15, 3});
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_TRUE(std::isfinite(e.estimate()));
    EXPECT_GT(e.error(), 0.0);
  }
}

TEST(Integrate, NonFiniteIntegrandThrows) {
  EXPECT_THROW(integrate([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0, 1.0),
               QuadratureError);
}

TEST(Integrate, InvalidSpecAndLimits) {
  auto f = [](double x) { return x; };
  EXPECT_THROW(integrate(f, 0.0, 1.0, QuadratureSpec{0.0, 1e-10, 10}), std::invalid_argument);
  EXPECT_THROW(integrate(f, 0.0, 1.0, QuadratureSpec{1e-10, -1.0, 10}), std::invalid_argument);
  EXPECT_THROW(integrate(f, 0.0, 1.0, QuadratureSpec{1e-10, 1e-10, 0}), std::invalid_argument);
  EXPECT_THROW(integrate(f, 0.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Integrate, SemiInfiniteAndRealLine) {
  EXPECT_NEAR(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(integrate_to_infinity([](double x) { return std::exp(-x); }, 2.0), std::exp(-2.0), 1e-13);
  EXPECT_NEAR(integrate_from_minus_infinity([](double x) { return std::exp(x); }, 1.0), std::exp(1.0), 1e-12);
  EXPECT_NEAR(integrate_real_line([](double x) { return std::exp(-0.5 * x * x); }, 0.3),
              std::sqrt(2.0 * std::numbers::pi), 1e-11);
}

TEST(CompensatedSum, RecoversCancelledBits) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  s += -1.0;
  // naive summation would lose ~1e-14 here
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);

  CompensatedSum t;
  t.add(1e100);
  t.add(1.0);
  t.add(-1e100);
  EXPECT_EQ(t.value(), 1.0);
}
