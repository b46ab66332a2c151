#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lcm/random.hpp"
#include "lcm/volatility.hpp"
#include "oracles.hpp"

using namespace lcm;

TEST(Returns, LogRatios) {
  const auto r = intradayReturns({100.0, 101.0, 99.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], std::log(101.0 / 100.0), 1e-15);
  EXPECT_NEAR(r[1], std::log(99.0) - std::log(101.0), 1e-15);
  EXPECT_THROW(intradayReturns({1.0, 0.0}), DomainError);
  EXPECT_THROW(intradayReturns({1.0}), DimensionError);
}

TEST(Measures, HandExamples) {
  const std::vector<double> r{0.01, -0.02, 0.03};
  EXPECT_NEAR(realizedVariance(r), 0.0014, 1e-18);
  EXPECT_NEAR(bipowerVariationRaw(r), 0.0008, 1e-18);
  EXPECT_NEAR(bipowerVariationRaw({0.01, 0.01}), 0.0001, 1e-18);
  EXPECT_DOUBLE_EQ(bipowerVariation(r), std::numbers::pi / 2 * bipowerVariationRaw(r));
  EXPECT_DOUBLE_EQ(bipowerVariation(r), bipowerVariation({-0.01, 0.02, -0.03}));
  EXPECT_NEAR(realizedKernel(r, 1), 0.0010, 1e-18);
  EXPECT_EQ(realizedKernel(r, 0), realizedVariance(r));
  EXPECT_THROW(realizedKernel(r, 3), DimensionError);
  EXPECT_THROW(bipowerVariationRaw({0.1}), DimensionError);
}

TEST(Measures, MedRv) {
  EXPECT_NEAR(medRvConstant(), 1.41944, 1e-4);
  const double a = 0.02;
  EXPECT_NEAR(medRV({a, -a, a, -a}), 4.0 * medRvConstant() * a * a, 1e-18);
  EXPECT_EQ(medRV({0.0, 0.0, 0.0}), 0.0);
  // a single spike at the centre is removed by the median
  EXPECT_NEAR(medRV({0.01, 0.5, 0.01}), medRvConstant() * 3.0 * 0.0001, 1e-15);
  EXPECT_THROW(medRV({0.1, 0.2}), DimensionError);
}

TEST(Measures, ParzenKernel) {
  EXPECT_EQ(parzenKernel(0.0), 1.0);
  EXPECT_EQ(parzenKernel(0.5), 0.25);
  EXPECT_EQ(2.0 * std::pow(0.5, 3), 0.25);
  EXPECT_EQ(parzenKernel(1.0), 0.0);
  EXPECT_EQ(parzenKernel(1.5), 0.0);
  EXPECT_EQ(parzenKernel(-0.3), parzenKernel(0.3));
}

TEST(Measures, MatchDefinitionalOracles) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 1e-3);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> r(static_cast<std::size_t>(5 + 13 * k));
    for (auto& v : r) v = z(rng);
    const int H = std::min<int>(static_cast<int>(r.size()) - 1, 7);
    EXPECT_NEAR(medRV(r), oracle::medrv(r), 1e-13 * oracle::medrv(r));
    EXPECT_NEAR(bipowerVariation(r), oracle::bpv(r), 1e-13 * oracle::bpv(r));
    EXPECT_NEAR(realizedKernel(r, H), oracle::rk(r, H), 1e-12 * oracle::rv(r));
  }
}

TEST(Measures, WhiteNoiseKernelNearRv) {
  Rng rng(3);
  std::vector<double> r(20000);
  for (auto& v : r) v = 1e-3 * rng.normal();
  EXPECT_NEAR(realizedKernel(r, defaultBandwidth(r.size())) / realizedVariance(r), 1.0, 0.05);
  EXPECT_EQ(defaultBandwidth(100), 10);
  EXPECT_EQ(defaultBandwidth(101), 11);
}

TEST(Jumps, Split) {
  const auto a = jumpAndContinuous(0.0014, 0.0008);
  EXPECT_NEAR(a.jump, 0.0006, 1e-18);
  EXPECT_NEAR(a.continuous, 0.0008, 1e-18);
  const auto b = jumpAndContinuous(0.001, 0.002);
  EXPECT_EQ(b.jump, 0.0);
  EXPECT_EQ(b.continuous, 0.001);
  const auto c = jumpAndContinuous(0.0, 0.0);
  EXPECT_EQ(c.jump + c.continuous, 0.0);
  EXPECT_THROW(jumpAndContinuous(-1.0, 0.0), DomainError);
}

TEST(Daily, ComputeMeasures) {
  std::vector<double> r;
  for (int k = 0; k < 50; ++k) r.push_back(k % 2 ? 0.01 : -0.012);
  const DailyMeasures d = computeDailyMeasures(r, "X", "2024-01-02", 3);
  EXPECT_EQ(d.symbol, "X");
  EXPECT_DOUBLE_EQ(d.rv, realizedVariance(r));
  EXPECT_DOUBLE_EQ(d.rk, realizedKernel(r, 3));
  EXPECT_DOUBLE_EQ(d.jump + d.cont, d.rv);
  // Parzen weights form a positive semi-definite Toeplitz matrix, so even strongly
  // alternating returns give RK >= 0
  EXPECT_GE(d.rk, 0.0);
  EXPECT_FALSE(d.negativeKernel);
}

TEST(Kendall, Basics) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(kendallTau(x, x), 1.0);
  EXPECT_DOUBLE_EQ(kendallTau(x, {5, 4, 3, 2, 1}), -1.0);
  // one discordant pair of ten
  EXPECT_DOUBLE_EQ(kendallTau(x, {1, 2, 3, 5, 4}), 0.8);
  // tau-b with a tie in y: C = 5, D = 0, n0 = 6, ty = 1 -> 5 / sqrt(6 * 5)
  EXPECT_NEAR(kendallTau({1, 2, 3, 4}, {1, 1, 2, 3}), 5.0 / std::sqrt(30.0), 1e-15);
  EXPECT_THROW(kendallTau({1, 2}, {1}), DimensionError);
}

TEST(Descriptive, MomentsByHand) {
  const DescriptiveStats s = descriptiveStats({1, 2, 3, 4, 10});
  EXPECT_DOUBLE_EQ(s.mean, 4.0);
  // deviations -3 -2 -1 0 6: m2 = 50/5, m3 = 180/5, m4 = 1394/5
  EXPECT_NEAR(s.sd, std::sqrt(50.0 / 4.0), 1e-14);
  EXPECT_NEAR(s.skewness, 36.0 / std::pow(10.0, 1.5), 1e-14);
  EXPECT_NEAR(s.kurtosis, 278.8 / 100.0, 1e-14);
  // lag-1: (6 + 2 + 0 + 0) / 50
  EXPECT_NEAR(s.acf1, 8.0 / 50.0, 1e-15);
  EXPECT_THROW(descriptiveStats({2, 2, 2}), DomainError);
}
