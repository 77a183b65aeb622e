#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dropreg/error.hpp"
#include "harness/harness.hpp"

namespace {

namespace h = dropreg::harness;

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

TEST(Grid, Parse) {
  const auto g = h::parse_grid("0:5:0.01");
  EXPECT_EQ(g.size(), 501u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 5.0, 1e-12);
  EXPECT_EQ(h::parse_grid("1:1:0.5").size(), 1u);
  for (const char* bad : {"", "0:1", "0:1:0", "1:0:0.1", "a:1:0.1"}) {
    EXPECT_THROW(h::parse_grid(bad), h::UsageError) << bad;
  }
}

TEST(CurveItem, ScaleAndDefaultLambda) {
  const auto a = h::parse_curve_item("logsum:eps=2,scale=2", 1.0);
  EXPECT_EQ(a.scale, 2.0);
  EXPECT_EQ(a.label, "logsum:eps=2,scale=2");
  const auto b = h::parse_curve_item("vardrop", 0.5);
  EXPECT_EQ(std::get<dropreg::MethodSpec>(b.spec).lambda, 0.5);
  EXPECT_FALSE(h::parse_curve_item("magprune:k=3", 1.0).separable());
  EXPECT_THROW(h::parse_curve_item("nope", 1.0), dropreg::Error);
}

TEST(PenaltyCurve, L1ColumnEqualsGrid) {
  std::ostringstream os;
  h::penalty_curve(os, {h::parse_curve_item("l1", 1.0)}, h::parse_grid("0:5:0.1"));
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 52u);
  EXPECT_EQ(ls[0], "w,l1");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto comma = ls[i].find(',');
    EXPECT_EQ(ls[i].substr(0, comma), ls[i].substr(comma + 1));
  }
}

TEST(PenaltyCurve, McpColumnMatchesFormula) {
  std::ostringstream os;
  h::penalty_curve(os, {h::parse_curve_item("mcp:a=1,lambda=1", 1.0)}, h::parse_grid("0:2:0.25"));
  const auto ls = lines(os.str());
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const double w = std::stod(ls[i].substr(0, ls[i].find(',')));
    const double v = std::stod(ls[i].substr(ls[i].find(',') + 1));
    EXPECT_NEAR(v, w < 1.0 ? w - 0.5 * w * w : 0.5, 1e-11) << w;
  }
}

TEST(PenaltyCurve, RejectsNonSeparableAndEmpty) {
  std::ostringstream os;
  EXPECT_THROW(h::penalty_curve(os, {h::parse_curve_item("hardthresh:k=2", 1.0)}, {0.0}), h::UsageError);
  EXPECT_THROW(h::penalty_curve(os, {h::parse_curve_item("magprune:k=2", 1.0)}, {0.0}), h::UsageError);
  EXPECT_THROW(h::penalty_curve(os, {}, {0.0}), h::UsageError);
}

TEST(SparseCurve, KnownColumns) {
  std::ostringstream os;
  h::sparse_curve(os, {h::parse_curve_item("l1", 1.0), h::parse_curve_item("l0", 1.0),
                       h::parse_curve_item("hardthresh:k=8", 1.0)},
                  32);
  const auto ls = lines(os.str());
  ASSERT_EQ(ls.size(), 33u);
  for (int k = 1; k <= 32; ++k) {
    std::istringstream row(ls[static_cast<std::size_t>(k)]);
    std::string kk, l1, l0, ht;
    std::getline(row, kk, ',');
    std::getline(row, l1, ',');
    std::getline(row, l0, ',');
    std::getline(row, ht, ',');
    EXPECT_EQ(std::stoi(kk), k);
    EXPECT_NEAR(std::stod(l1), std::sqrt(k), 1e-10);
    EXPECT_EQ(std::stod(l0), k);
    EXPECT_EQ(ht, k <= 8 ? "0" : "inf");
  }
}

TEST(DualityReport, PassAndFail) {
  std::ostringstream os;
  const auto grid = dropreg::log_grid(1e-3, 10.0, 64);
  EXPECT_TRUE(h::duality_report(os, {dropreg::PenaltySpec::l1()}, grid, {}));
  dropreg::DualCheckOptions bad;
  bad.f_shift = 0.5;
  EXPECT_FALSE(h::duality_report(os, {dropreg::PenaltySpec::l1()}, grid, bad));
}

TEST(Synthetic, StandardizedSparseAndDeterministic) {
  const auto a = h::gen_synthetic(50, 20, 4, 0.0, 7);
  const auto b = h::gen_synthetic(50, 20, 4, 0.0, 7);
  EXPECT_TRUE((a.problem.X.array() == b.problem.X.array()).all());
  EXPECT_TRUE((a.w_true.array() == b.w_true.array()).all());
  const Eigen::VectorXd diag = (a.problem.X.transpose() * a.problem.X).diagonal() / 50.0;
  EXPECT_LT((diag.array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_EQ((a.w_true.array() != 0.0).count(), 4);
  EXPECT_EQ(a.w_true.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LT((a.problem.X * a.w_true - a.problem.y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(h::gen_synthetic(10, 3, 4, 0.0, 1), h::UsageError);
}

TEST(Synthetic, ParseSpec) {
  const auto s = h::parse_synthetic("n=80,d=128,k=5");
  EXPECT_EQ(s.n, 80);
  EXPECT_EQ(s.d, 128);
  EXPECT_EQ(s.k, 5);
  EXPECT_EQ(s.noise, 0.0);
  EXPECT_THROW(h::parse_synthetic("n=80,q=1"), dropreg::Error);
}

TEST(Format, Numbers) {
  EXPECT_EQ(h::format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(h::format_number(0.1), "0.1");
  EXPECT_EQ(h::format_number(1.0 / 3.0), "0.333333333333");
}

TEST(DropoutVerify, Families) {
  for (const auto kind : {dropreg::MaskKind::Gaussian, dropreg::MaskKind::UnbiasedBinary,
                          dropreg::MaskKind::BiasedBernoulli}) {
    const auto r = h::dropout_verify(200, 10, kind, 100000, 1, 0.5, 0.9);
    EXPECT_LE(std::abs(r.z), 4.0);
  }
}

TEST(DropoutVerify, UnitAlphaIsExact) {
  const auto r = h::dropout_verify(200, 10, dropreg::MaskKind::Gaussian, 1000, 1, 1.0, 1.0);
  EXPECT_EQ(r.mc.std_error, 0.0);
  EXPECT_EQ(r.z, 0.0);
}

}  // namespace
