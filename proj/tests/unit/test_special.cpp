#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dropreg/error.hpp"
#include "dropreg/quadrature.hpp"
#include "dropreg/special.hpp"
#include "support/oracles.hpp"

namespace {

// Reference values from a 30-digit mpmath quadrature of the defining integrals.
constexpr double kDawson1 = 0.53807950691276841914;
constexpr double kDawson10 = 0.050253847187598528033;
constexpr double kKl1 = 0.42668560429604480579;
constexpr double kKl10 = 1.7241378464709262402;
constexpr double kKlMicro = 4.9999991666667775515e-7;

TEST(Dawson, KnownValues) {
  EXPECT_EQ(dropreg::dawson(0.0), 0.0);
  EXPECT_NEAR(dropreg::dawson(1.0), kDawson1, 1e-14);
  EXPECT_NEAR(dropreg::dawson(10.0), kDawson10, 1e-14);
}

TEST(Dawson, IsOddExactly) {
  for (double u : {0.1, 0.9, 1.0, 2.5, 6.0, 7.3, 30.0}) {
    EXPECT_EQ(dropreg::dawson(-u), -dropreg::dawson(u));
  }
}

TEST(Dawson, AgreesWithOracleAcrossBranches) {
  for (double u = 0.0; u <= 12.0; u += 0.37) {
    EXPECT_NEAR(dropreg::dawson(u), oracle::dawson(u), 1e-12) << u;
  }
}

TEST(Dawson, LargeArgumentAsymptote) {
  for (double u : {20.0, 50.0}) {
    const double asym = 1.0 / (2 * u) + 1.0 / (4 * u * u * u) + 3.0 / (8 * std::pow(u, 5));
    EXPECT_NEAR(dropreg::dawson(u), asym, 1e-9);
  }
}

TEST(Dawson, OdeResidual) {
  const double h = 1e-5;
  for (double u = 0.0; u <= 5.0; u += 0.05) {
    const double d = (dropreg::dawson(u + h) - dropreg::dawson(u - h)) / (2 * h);
    EXPECT_LE(std::abs(d + 2 * u * dropreg::dawson(u) - 1.0), 1e-6) << u;
  }
}

TEST(KlLogUniform, Values) {
  EXPECT_EQ(dropreg::kl_loguniform(0.0), 0.0);
  EXPECT_NEAR(dropreg::kl_loguniform(1.0), kKl1, 1e-10);
  EXPECT_NEAR(dropreg::kl_loguniform(10.0), kKl10, 1e-9);
  EXPECT_NEAR(dropreg::kl_loguniform(1e-6), kKlMicro, 1e-15);
  EXPECT_EQ(dropreg::kl_loguniform(std::numeric_limits<double>::infinity()),
            std::numeric_limits<double>::infinity());
}

TEST(KlLogUniform, MatchesGaussLegendreOracle) {
  for (double e : {0.01, 0.5, 1.0, 3.0, 25.0}) {
    EXPECT_NEAR(dropreg::kl_loguniform(e), oracle::kl_loguniform(e), 1e-9) << e;
  }
}

TEST(KlLogUniform, IntegrandLimitAndMonotonicity) {
  EXPECT_EQ(dropreg::kl_loguniform_integrand(0.0), 0.5);
  double prev = 0.0;
  for (double e = 0.1; e < 200.0; e *= 1.7) {
    const double v = dropreg::kl_loguniform(e);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(KlLogUniform, LogarithmicGrowth) {
  const double a = dropreg::kl_loguniform(1e4);
  const double b = dropreg::kl_loguniform(1e6);
  EXPECT_NEAR(b - a, 0.5 * std::log(100.0), 1e-3);
}

TEST(Quadrature, ConstantAndCubic) {
  EXPECT_NEAR(dropreg::quad_adaptive([](double) { return 1.0; }, 0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(dropreg::quad_adaptive([](double t) { return t * t; }, 0.0, 1.0), 1.0 / 3.0, 1e-15);
}

TEST(Quadrature, EndpointSingularity) {
  const double v = dropreg::quad_adaptive([](double t) { return 1.0 / (2.0 * std::sqrt(t)); }, 0.0, 4.0);
  EXPECT_NEAR(v, 2.0, 1e-8);
}

TEST(Quadrature, ReversedBoundsAndEmpty) {
  EXPECT_NEAR(dropreg::quad_adaptive([](double t) { return t; }, 1.0, 0.0), -0.5, 1e-14);
  EXPECT_EQ(dropreg::quad_adaptive([](double t) { return t; }, 2.0, 2.0), 0.0);
}

TEST(Quadrature, DepthExceeded) {
  dropreg::QuadratureOptions opts;
  opts.max_depth = 3;
  opts.abs_tol = 1e-14;
  try {
    dropreg::quad_adaptive([](double t) { return std::sin(200.0 * t); }, 0.0, 3.0, opts);
    FAIL();
  } catch (const dropreg::Error& e) {
    EXPECT_EQ(e.code(), dropreg::ErrorCode::DepthExceeded);
  }
}

TEST(Quadrature, ScalarFnOverload) {
  const dropreg::ScalarFn fn("exp", {0.0, 1.0}, [](double t) { return std::exp(t); });
  EXPECT_NEAR(dropreg::quad_adaptive(fn, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-10);
}

}  // namespace
