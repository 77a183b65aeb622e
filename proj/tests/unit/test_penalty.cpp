#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dropreg/error.hpp"
#include "dropreg/penalty.hpp"
#include "dropreg/spec_string.hpp"

namespace {

using dropreg::EtaVector;
using dropreg::PenaltySpec;

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

EtaVector eta(std::initializer_list<double> v) { return EtaVector(vec(v)); }

std::vector<PenaltySpec> separable_zoo() {
  return {PenaltySpec::l1(),        PenaltySpec::lp_pow(0.5),       PenaltySpec::lp_pow(1.5),
          PenaltySpec::elastic_net(0.5), PenaltySpec::huber(1.0),  PenaltySpec::log_sum(2.0),
          PenaltySpec::scad(3.0, 1.0),   PenaltySpec::mcp(3.0, 1.0), PenaltySpec::mcp(1.0, 1.0)};
}

TEST(Omega, McpInsideKnee) {
  EXPECT_DOUBLE_EQ(dropreg::omega(PenaltySpec::mcp(1.0, 1.0), vec({0.5})), 0.375);
}

TEST(Omega, LogSumAtZeroIsLogEps) {
  EXPECT_DOUBLE_EQ(dropreg::omega(PenaltySpec::log_sum(2.0), vec({0.0})), std::log(2.0));
}

TEST(Omega, ScadMiddleBranch) {
  EXPECT_NEAR(dropreg::omega(PenaltySpec::scad(3.0, 1.0), vec({2.0})), 1.75, 1e-15);
}

TEST(Omega, ScadAndMcpBranches) {
  const PenaltySpec scad = PenaltySpec::scad(3.0, 1.0);
  EXPECT_DOUBLE_EQ(scad.omega_scalar(0.5), 0.5);
  EXPECT_DOUBLE_EQ(scad.omega_scalar(10.0), 2.0);  // lambda^2 (a + 1) / 2
  EXPECT_DOUBLE_EQ(PenaltySpec::mcp(3.0, 1.0).omega_scalar(4.0), 1.5);
}

TEST(Omega, SeparableVectorIsSumOfScalars) {
  const Eigen::VectorXd w = vec({-2.5, 0.0, 0.3, 1.7, -0.01});
  for (const PenaltySpec& spec : separable_zoo()) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) sum += spec.omega_scalar(w[j]);
    EXPECT_NEAR(dropreg::omega(spec, w), sum, 1e-13) << spec.to_string();
  }
}

TEST(Omega, LpNormAndL0AndHardThresh) {
  EXPECT_NEAR(dropreg::omega(PenaltySpec::lp(0.5), vec({1.0, 4.0})), 9.0, 1e-12);
  EXPECT_DOUBLE_EQ(dropreg::omega(PenaltySpec::l0(), vec({0.0, -3.0, 1e-30})), 2.0);
  EXPECT_DOUBLE_EQ(dropreg::omega(PenaltySpec::hard_thresh(2), vec({3.0, 0.0, 2.0})), 0.0);
  EXPECT_EQ(dropreg::omega(PenaltySpec::hard_thresh(1), vec({3.0, 0.0, 2.0})), kInf);
}

TEST(FDual, LogSumAtThree) {
  EXPECT_NEAR(dropreg::f_dual(PenaltySpec::log_sum(2.0), eta({3.0})),
              2.0 * std::log(3.0) - 1.0 / 3.0, 1e-14);
}

TEST(FDual, HuberOutsideDomainIsInfinite) {
  EXPECT_EQ(dropreg::f_dual(PenaltySpec::huber(1.0), eta({0.5})), kInf);
}

TEST(FDual, McpAtOne) {
  EXPECT_DOUBLE_EQ(dropreg::f_dual(PenaltySpec::mcp(1.0, 1.0), eta({1.0})), 0.5);
}

TEST(FDual, DomainRestrictions) {
  EXPECT_EQ(dropreg::f_dual(PenaltySpec::elastic_net(0.5), eta({3.0})), kInf);
  EXPECT_EQ(dropreg::f_dual(PenaltySpec::hard_thresh(1), eta({kInf, 0.0, kInf})), kInf);
  EXPECT_DOUBLE_EQ(dropreg::f_dual(PenaltySpec::hard_thresh(2), eta({kInf, 0.0, kInf})), 0.0);
  EXPECT_DOUBLE_EQ(dropreg::f_dual(PenaltySpec::l0(), eta({0.0, 2.0, kInf})), 4.0);
}

TEST(EtaHat, LogSum) {
  EXPECT_DOUBLE_EQ(dropreg::eta_hat(PenaltySpec::log_sum(2.0), vec({1.0}))[0], 3.0);
}

TEST(EtaHat, HardThreshTopK) {
  EXPECT_EQ(dropreg::eta_hat(PenaltySpec::hard_thresh(2), vec({3.0, -1.0, 2.0})),
            eta({kInf, 0.0, kInf}));
}

TEST(EtaHat, LpPowAndDualConsistency) {
  const PenaltySpec spec = PenaltySpec::lp_pow(0.5);
  const double e = dropreg::eta_hat(spec, vec({4.0}))[0];
  EXPECT_NEAR(e, 8.0, 1e-12);
  EXPECT_NEAR(0.5 * (16.0 / e + spec.f_scalar(e)), spec.omega_scalar(4.0), 1e-12);
  EXPECT_NEAR(spec.omega_scalar(4.0), 4.0, 1e-12);
}

TEST(EtaHat, McpSaturatesBeyondKnee) {
  EXPECT_EQ(PenaltySpec::mcp(1.0, 1.0).eta_hat_scalar(2.0), kInf);
  EXPECT_EQ(PenaltySpec::scad(3.0, 1.0).eta_hat_scalar(3.5), kInf);
}

TEST(EtaHat, LpNormAtZeroIsZero) {
  const EtaVector e = dropreg::eta_hat(PenaltySpec::lp(0.5), vec({0.0, 0.0}));
  EXPECT_EQ(e, eta({0.0, 0.0}));
}

TEST(EtaHat, TiesGoToLowestIndex) {
  const auto idx = dropreg::top_k_indices(vec({1.0, -2.0, 2.0, 2.0}), 2);
  ASSERT_EQ(idx.size(), 2u);
  EXPECT_EQ(idx[0], 1);
  EXPECT_EQ(idx[1], 2);
}

TEST(EtaDomain, Examples) {
  EXPECT_TRUE(dropreg::eta_in_domain(PenaltySpec::hard_thresh(2), eta({kInf, 0.0, kInf})));
  EXPECT_FALSE(dropreg::eta_in_domain(PenaltySpec::hard_thresh(1), eta({kInf, 0.0, kInf})));
  EXPECT_FALSE(dropreg::eta_in_domain(PenaltySpec::elastic_net(0.5), eta({3.0})));
  EXPECT_TRUE(dropreg::eta_in_domain(PenaltySpec::huber(1.0), eta({1.0, kInf})));
}

TEST(Sentinels, QuadOverEta) {
  EXPECT_EQ(dropreg::quad_over_eta(2.0, kInf), 0.0);
  EXPECT_EQ(dropreg::quad_over_eta(2.0, 0.0), kInf);
  EXPECT_EQ(dropreg::quad_over_eta(0.0, 0.0), 0.0);
}

// f(eta_hat(w)) + w^2 / eta_hat(w) = 2 Omega(w), wherever eta_hat is finite.
TEST(Duality, ClosedFormIdentityOnGrid) {
  for (const PenaltySpec& spec : separable_zoo()) {
    for (double w : {0.01, 0.2, 0.7, 1.0, 1.9, 2.6, 5.0}) {
      const double e = spec.eta_hat_scalar(w);
      if (!std::isfinite(e) || e == 0.0) continue;
      EXPECT_NEAR(spec.f_scalar(e) + w * w / e, 2.0 * spec.omega_scalar(w),
                  1e-12 * std::max(1.0, spec.omega_scalar(w)))
          << spec.to_string() << " w=" << w;
    }
  }
}

TEST(Gradients, OmegaGradientMatchesFiniteDifferences) {
  const Eigen::VectorXd w = vec({0.3, -1.2, 2.4});
  for (const PenaltySpec& spec : separable_zoo()) {
    const Eigen::VectorXd g = dropreg::omega_gradient(spec, w);
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const double h = 1e-6;
      const double fd = (spec.omega_scalar(w[j] + h) - spec.omega_scalar(w[j] - h)) / (2 * h);
      EXPECT_NEAR(g[j], fd, 1e-6) << spec.to_string() << " j=" << j;
    }
  }
}

TEST(Gradients, FGradientMatchesFiniteDifferences) {
  for (const PenaltySpec& spec :
       {PenaltySpec::l1(), PenaltySpec::log_sum(2.0), PenaltySpec::mcp(3.0, 1.0),
        PenaltySpec::lp_pow(0.5), PenaltySpec::elastic_net(0.5)}) {
    const double e0 = 1.3;
    const double h = 1e-6;
    const double fd = (spec.f_scalar(e0 + h) - spec.f_scalar(e0 - h)) / (2 * h);
    EXPECT_NEAR(dropreg::f_gradient(spec, eta({e0}))[0], fd, 1e-6) << spec.to_string();
  }
}

TEST(Construction, RejectsInvalidRanges) {
  EXPECT_THROW(PenaltySpec::lp(2.0), dropreg::Error);
  EXPECT_THROW(PenaltySpec::lp_pow(0.0), dropreg::Error);
  EXPECT_THROW(PenaltySpec::elastic_net(1.0), dropreg::Error);
  EXPECT_THROW(PenaltySpec::huber(0.0), dropreg::Error);
  EXPECT_THROW(PenaltySpec::log_sum(-1.0), dropreg::Error);
  EXPECT_THROW(PenaltySpec::scad(1.0, 1.0), dropreg::Error);
  EXPECT_THROW(PenaltySpec::mcp(0.0, 1.0), dropreg::Error);
}

TEST(Parse, RoundTripsThroughToString) {
  for (const char* text : {"l1", "lp:p=0.5", "lppow:p=1.5", "l0", "elasticnet:theta=0.25",
                           "huber:eps=1", "logsum:eps=2", "scad:a=3,lambda=1",
                           "mcp:a=1,lambda=1", "hardthresh:k=5"}) {
    const PenaltySpec spec = dropreg::parse_penalty(text);
    EXPECT_EQ(spec.to_string(), text);
    EXPECT_EQ(dropreg::parse_penalty(spec.to_string()), spec);
  }
}

TEST(Parse, RejectsMalformedInput) {
  for (const char* text : {"", "nope", "logsum", "logsum:eps=", "logsum:eps=x", "l1:p=2",
                           "hardthresh:k=1.5", "mcp:a=1", "logsum:eps=1,eps=2"}) {
    EXPECT_THROW(dropreg::parse_penalty(text), dropreg::Error) << text;
  }
}

TEST(Parse, ErrorCodeIsParseError) {
  try {
    dropreg::parse_penalty("nope");
    FAIL();
  } catch (const dropreg::Error& e) {
    EXPECT_EQ(e.code(), dropreg::ErrorCode::ParseError);
  }
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(dropreg::format_real(0.1), "0.1");
  EXPECT_EQ(dropreg::format_real(2.0), "2");
  EXPECT_EQ(std::stod(dropreg::format_real(1e-4)), 1e-4);
  EXPECT_EQ(std::stod(dropreg::format_real(0.1 + 0.2)), 0.1 + 0.2);
}

}  // namespace
