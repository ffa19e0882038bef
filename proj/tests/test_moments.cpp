#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace siminfer;
using siminfer::testing::make;

TEST(DiffInMeans, Fixtures) {
  EXPECT_NEAR(diff_in_means(siminfer::testing::sleep()), 3.0, 1e-12);
  EXPECT_NEAR(diff_in_means(siminfer::testing::acs()), 18.8, 1e-9);
  EXPECT_EQ(diff_in_means(make({5, 5, 5, 5}, {1, 1, 0, 0})), 0.0);
}

TEST(GrandVariance, TextbookCase) {
  EXPECT_DOUBLE_EQ(grand_variance(make({1, 2, 3, 4, 5}, {1, 1, 0, 0, 0})), 2.5);
}

TEST(GrandVariance, Fixtures) {
  EXPECT_NEAR(std::sqrt(grand_variance(siminfer::testing::sleep())), 3.686, 5e-4);
  EXPECT_NEAR(grand_variance(siminfer::testing::sleep()), 13.587, 1e-3);
  EXPECT_NEAR(std::sqrt(grand_variance(siminfer::testing::acs())), 52.248, 5e-4);
}

TEST(GroupVariance, Fixtures) {
  const auto s = siminfer::testing::sleep();
  EXPECT_NEAR(std::sqrt(group_variance(s, 1)), 3.306, 5e-4);
  EXPECT_NEAR(std::sqrt(group_variance(s, 0)), 3.545, 5e-4);
  const auto a = siminfer::testing::acs();
  EXPECT_NEAR(std::sqrt(group_variance(a, 1)), 62.848, 5e-4);
  EXPECT_NEAR(std::sqrt(group_variance(a, 0)), 36.920, 5e-4);
  EXPECT_EQ(group_variance(make({7, 7, 1, 2}, {1, 1, 0, 0}), 1), 0.0);
}

TEST(GrandVariance, TranslationAndScale) {
  const auto base = make({1.5, 2, 7, 3, 4.25, 9}, {1, 0, 1, 0, 1, 0});
  std::vector<double> shifted, scaled;
  for (double y : base.outcomes()) {
    shifted.push_back(y + 1000.0);
    scaled.push_back(3.0 * y);
  }
  std::vector<std::uint8_t> w(base.assignments().begin(), base.assignments().end());
  EXPECT_NEAR(grand_variance(make(shifted, w)), grand_variance(base), 1e-9);
  EXPECT_NEAR(grand_variance(make(scaled, w)), 9.0 * grand_variance(base), 1e-9);
}

TEST(GrandVariance, ExceedsPooledWithinWhenMeansDiffer) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y;
    std::vector<std::uint8_t> w;
    for (int i = 0; i < 10; ++i) {
      w.push_back(i % 2);
      y.push_back(z(gen) + (i % 2) * 2.0);
    }
    const auto s = make(y, w);
    const double pooled = ((s.n1() - 1) * group_variance(s, 1) + (s.n0() - 1) * group_variance(s, 0)) /
                          static_cast<double>(s.n() - 2);
    EXPECT_GT(grand_variance(s), pooled * (s.n() - 2) / static_cast<double>(s.n() - 1));
  }
}

TEST(Summarize, SymmetricPair) {
  const std::vector<double> d = {-1.0, 1.0};
  const auto s = summarize(d, "test", std::nullopt);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.variance, 1.0);
  EXPECT_EQ(s.skewness, 0.0);
  EXPECT_TRUE(s.higher_moments_defined);
}

TEST(Summarize, ConstantDrawsLeaveHigherMomentsUndefined) {
  const std::vector<double> d(100, 4.0);
  const auto s = summarize(d, "test", 1);
  EXPECT_EQ(s.variance, 0.0);
  EXPECT_FALSE(s.higher_moments_defined);
  EXPECT_TRUE(std::isnan(s.skewness));
}

TEST(Summarize, RejectsFewerThanTwoDraws) {
  const std::vector<double> d = {1.0};
  EXPECT_THROW(summarize(d, "test", std::nullopt), ValidationError);
}

TEST(Summarize, InvariantUnderShift) {
  std::mt19937_64 gen(11);
  std::gamma_distribution<double> g(2.0, 1.0);
  std::vector<double> d(200000), shifted(200000);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = g(gen);
    shifted[i] = d[i] + 50.0;
  }
  const auto a = summarize(d, "x", std::nullopt);
  const auto b = summarize(shifted, "x", std::nullopt);
  EXPECT_NEAR(a.variance, b.variance, 1e-9);
  EXPECT_NEAR(a.skewness, b.skewness, 1e-7);
  EXPECT_NEAR(a.excess_kurtosis, b.excess_kurtosis, 1e-7);
  // gamma(2): skewness 2/sqrt(2), excess kurtosis 3
  EXPECT_NEAR(a.skewness, std::sqrt(2.0), 0.05);
  EXPECT_NEAR(a.excess_kurtosis, 3.0, 0.3);
}

TEST(MomentAccumulator, MergeMatchesTwoPass) {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> e(0.5);
  std::vector<double> d(100001);
  for (auto& x : d) x = e(gen);
  MomentAccumulator left, right;
  for (std::size_t i = 0; i < d.size(); ++i) (i < 37000 ? left : right).push(d[i]);
  left.merge(right);
  const auto s = summarize(d, "x", std::nullopt);
  EXPECT_EQ(left.count(), d.size());
  EXPECT_NEAR(left.mean(), s.mean, 1e-12);
  EXPECT_NEAR(left.central2(), s.variance, 1e-10);
  EXPECT_NEAR(left.central3() / std::pow(left.central2(), 1.5), s.skewness, 1e-9);
  EXPECT_NEAR(left.central4() / (left.central2() * left.central2()) - 3.0, s.excess_kurtosis, 1e-9);
}
