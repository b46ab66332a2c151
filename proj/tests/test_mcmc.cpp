#include <gtest/gtest.h>

#include <cmath>

#include "lcm/fit.hpp"
#include "lcm/mcmc.hpp"
#include "lcm/simulator.hpp"

using namespace lcm;

TEST(Ess, IndependentAndAutocorrelatedChains) {
  Rng r(1);
  std::vector<double> iid(20000), ar(20000);
  double x = 0.0;
  for (std::size_t k = 0; k < iid.size(); ++k) {
    iid[k] = r.normal();
    x = 0.9 * x + r.normal();
    ar[k] = x;
  }
  EXPECT_NEAR(effectiveSampleSize(iid) / 20000.0, 1.0, 0.15);
  // integrated autocorrelation time (1 + rho) / (1 - rho) = 19
  EXPECT_NEAR(effectiveSampleSize(ar), 20000.0 / 19.0, 0.25 * 20000.0 / 19.0);
}

TEST(Wishart, MeanIsDfTimesScale) {
  Rng r(2);
  Matrix scale(2, 2);
  scale << 0.5, 0.1, 0.1, 0.3;
  Matrix mean = Matrix::Zero(2, 2);
  const int n = 40000;
  for (int k = 0; k < n; ++k) mean += detail::sampleWishart(6.0, scale, r) / n;
  EXPECT_LT((mean - 6.0 * scale).cwiseAbs().maxCoeff(), 0.03);
}

class SmallMcmc : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SimulationTruth t;
    t.tau = 2.0;
    t.m = 2;
    t.n = 4;
    t.T = 40;
    t.seed = 5;
    t.phis = {0.7 * Matrix::Identity(2, 2)};
    t.stateVariances = Vector::Constant(2, 0.3);
    t.sigma = Matrix::Identity(2, 2) * 0.4;
    t.sigma(0, 1) = t.sigma(1, 0) = 0.2;
    data_ = new PanelData(simulateLcm(t).data);
  }
  static void TearDownTestSuite() { delete data_; }
  static PanelData* data_;
};
PanelData* SmallMcmc::data_ = nullptr;

TEST_F(SmallMcmc, DeterministicForASeed) {
  McmcOptions o;
  o.iterations = 300;
  o.burnIn = 100;
  o.seed = 4;
  const LcmSpec spec = LcmSpec::make(Variant::LcmAr, 1, {"S"});
  const McmcResult a = mcmcOracle(spec, *data_, o), b = mcmcOracle(spec, *data_, o);
  for (std::size_t k = 0; k < a.hyper.size(); ++k) EXPECT_EQ(a.hyper[k].mean, b.hyper[k].mean);
  EXPECT_EQ(a.stateMean, b.stateMean);
  o.seed = 5;
  EXPECT_NE(mcmcOracle(spec, *data_, o).hyper[0].mean, a.hyper[0].mean);
}

TEST_F(SmallMcmc, NamesFollowTheFit) {
  McmcOptions o;
  o.iterations = 50;
  o.burnIn = 10;
  const LcmSpec spec = LcmSpec::make(Variant::LcmVar, 1, {"S"});
  const McmcResult r = mcmcOracle(spec, *data_, o);
  const auto names = naturalHyperNames(spec, 2);
  ASSERT_EQ(r.hyper.size(), names.size());
  for (std::size_t k = 0; k < names.size(); ++k) EXPECT_EQ(r.hyper[k].name, names[k]);
  EXPECT_EQ(r.fixed[0].name, "beta[S]");
  EXPECT_EQ(r.draws, 50);
  EXPECT_THROW(r.find("nope"), DimensionError);
}

TEST_F(SmallMcmc, AgreesWithLaplaceOnFixedEffects) {
  const LcmSpec spec = LcmSpec::make(Variant::LcmAr, 1, {"S"});
  const FitResult fit = fitLcm<GammaFamily>(spec, *data_);
  McmcOptions o;
  o.iterations = 8000;
  o.burnIn = 2000;
  o.seed = 1;
  const McmcResult mc = mcmcOracle(spec, *data_, o);
  EXPECT_NEAR(fit.fixed[0].mean, mc.find("beta[S]").mean, 0.05);
  EXPECT_NEAR(fit.hyperSummary("phi_11").mean, mc.find("phi_11").mean, 0.15);
  EXPECT_GT(mc.nuAcceptance, 0.2);
  EXPECT_LT(mc.nuAcceptance, 0.7);
}

TEST_F(SmallMcmc, RejectsHigherLagOrder) {
  EXPECT_THROW(mcmcOracle(LcmSpec::make(Variant::LcmAr, 2), *data_), ConfigError);
}
