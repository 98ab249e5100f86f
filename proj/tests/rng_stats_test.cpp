#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <rcising/rng.hpp>
#include <rcising/stats.hpp>

namespace rcising {
namespace {

// Known-answer values of Philox4x32-10 for counter 0 and key 0.
TEST(Philox, KnownAnswer) {
  Philox rng(0, 0);
  EXPECT_EQ(rng(), 0xe169c58d6627e8d5ULL);
  EXPECT_EQ(rng(), 0x9b00dbd8bc57ac4cULL);
  EXPECT_EQ(rng.position(), 1u);
}

TEST(Philox, DeterministicAndStreamsDiffer) {
  Philox a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
  const Philox root(9);
  Philox s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  const auto v = s1();
  EXPECT_EQ(v, s1b());
  EXPECT_NE(v, s2());
}

TEST(Philox, UniformAndIndex) {
  Philox rng(5);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);

  // χ² goodness of fit for index(7); 0.001 critical value at 6 dof is 22.46.
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.index(7)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);
  EXPECT_EQ(rng.index(1), 0u);
}

TEST(BatchMeans, ConstantSeriesHasZeroError) {
  const EstimateResult r = batch_means(std::vector<double>(10000, 1.0));
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.n_batches, 100u);
  EXPECT_FALSE(r.unreliable);
}

TEST(BatchMeans, FlagsFewBatches) {
  const EstimateResult r = batch_means(std::vector<double>{1, 0, 1, 0, 1, 0, 1, 0, 1});
  EXPECT_EQ(r.n_batches, 3u);
  EXPECT_TRUE(r.unreliable);
  EXPECT_GT(r.std_error, 0.0);
}

TEST(BatchMeans, IidErrorMatchesTheory) {
  Philox rng(17);
  std::vector<double> x(40000);
  for (auto& v : x) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
  const EstimateResult r = batch_means(x);
  const double theory = std::sqrt(0.3 * 0.7 / 40000);
  EXPECT_NEAR(r.std_error / theory, 1.0, 0.3);
  EXPECT_NEAR(r.tau_int, 0.5, 0.3);
}

TEST(BatchMeans, CorrelatedSeriesHasLargerTau) {
  // AR(1) with coefficient 0.9: τ_int = (1 + 0.9) / (2 (1 - 0.9)) = 9.5.
  Philox rng(3);
  std::vector<double> x(250000);
  double v = 0;
  for (auto& s : x) {
    v = 0.9 * v + (rng.uniform() - 0.5);
    s = v;
  }
  const EstimateResult r = batch_means(x);
  EXPECT_GT(r.tau_int, 5.0);
  EXPECT_LT(r.tau_int, 14.0);
}

TEST(Jackknife, RatioOfConstantBatches) {
  const auto ratio = [](const std::vector<double>& t) { return t[0] / t[1]; };
  const JackknifeEstimate r = jackknife(std::vector<std::vector<double>>(40, {6.0, 2.0}), ratio);
  EXPECT_DOUBLE_EQ(r.value, 3.0);
  EXPECT_NEAR(r.std_error, 0.0, 1e-14);
  EXPECT_FALSE(r.unreliable);
}

TEST(Jackknife, MeanMatchesBatchMeansError) {
  Philox rng(12);
  std::vector<std::vector<double>> b;
  std::vector<double> means;
  for (int k = 0; k < 50; ++k) {
    double s = 0;
    for (int i = 0; i < 100; ++i) s += rng.uniform();
    b.push_back({s, 100.0});
    means.push_back(s / 100);
  }
  const auto jk = jackknife(b, [](const std::vector<double>& t) { return t[0] / t[1]; });
  const EstimateResult bm = batch_means(means, 1);
  EXPECT_NEAR(jk.value, bm.mean, 1e-12);
  EXPECT_NEAR(jk.std_error, bm.std_error, 1e-12);
}

TEST(FitThroughOrigin, RecoversPlantedSlope) {
  const std::vector<double> t{0.1, 0.05, 0.02};
  std::vector<double> y;
  for (double s : t) y.push_back(s / 2.0);
  const OriginFit f = fit_through_origin(t, y);
  EXPECT_NEAR(f.slope, 0.5, 1e-15);
  for (double r : f.residuals) EXPECT_NEAR(r, 0.0, 1e-16);
  EXPECT_THROW(fit_through_origin({0.0}, {1.0}), ConfigError);
}

}  // namespace
}  // namespace rcising
