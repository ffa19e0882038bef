#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "siminfer/oracle.hpp"
#include "support.hpp"

using namespace siminfer;
using siminfer::testing::make;

namespace {

double population_variance(const std::vector<double>& d) {
  long double m = 0.0L;
  for (double x : d) m += x;
  m /= d.size();
  long double ss = 0.0L;
  for (double x : d) ss += (x - m) * (x - m);
  return static_cast<double>(ss / d.size());
}

}  // namespace

TEST(Random, StreamsAreDeterministicAndDistinct) {
  StreamRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Random, BelowIsUniform) {
  StreamRng rng(1, 0);
  std::vector<int> counts(7, 0);
  const int draws = 700000;
  for (int i = 0; i < draws; ++i) ++counts[rng.below(7)];
  for (int c : counts) EXPECT_NEAR(c, draws / 7.0, 5 * std::sqrt(draws / 7.0));
}

TEST(Binomial, MatchesPascal) {
  EXPECT_EQ(binomial(24, 12), 2704156u);
  EXPECT_EQ(oracle::allocation_count(24, 12), 2704156u);
  EXPECT_EQ(binomial(431, 214), std::nullopt);
  for (std::uint64_t n = 1; n <= 40; ++n)
    for (std::uint64_t k = 0; k <= n; ++k) EXPECT_EQ(binomial(n, k), oracle::allocation_count(n, k));
}

TEST(Impute, ZeroShiftKeepsObservedOutcomes) {
  const auto s = make({1, 2, 3, 4, 5}, {1, 0, 1, 0, 0});
  const auto t = impute_additive(s, 0.0);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(t.y1()[i], s.outcomes()[i]);
    EXPECT_EQ(t.y0()[i], s.outcomes()[i]);
  }
  const auto shifted = impute_additive(s, 2.0);
  EXPECT_EQ(shifted.y1()[1], 4.0);
  EXPECT_EQ(shifted.y0()[0], -1.0);
  EXPECT_EQ(shifted.effect_variance(), 0.0);
}

TEST(ReallocateExact, FiveUnitTextbookCase) {
  const auto s = make({1, 2, 3, 4, 5}, {1, 1, 0, 0, 0});
  const auto draws = reallocate_exact(s, 0.0);
  ASSERT_EQ(draws.size(), 10u);
  double mean = 0.0;
  for (double d : draws) mean += d;
  EXPECT_NEAR(mean / 10.0, 0.0, 1e-14);
  EXPECT_NEAR(population_variance(draws), 25.0 / 12.0, 1e-12);
}

TEST(ReallocateExact, ConstantOutcomesGiveZeroDraws) {
  for (double d : reallocate_exact(make({3, 3, 3, 3}, {1, 1, 0, 0}), 0.0)) EXPECT_EQ(d, 0.0);
}

TEST(ReallocateExact, RefusesAboveThreshold) {
  EXPECT_THROW(reallocate_exact(siminfer::testing::sleep(), 0.0), EnumerationLimitError);
}

TEST(ReallocateExact, OrderFreeMultiset) {
  auto a = reallocate_exact(make({4, 9, 1, 7, 2, 8, 5}, {1, 1, 1, 0, 0, 0, 0}), 1.5);
  auto b = reallocate_exact(make({8, 1, 5, 9, 4, 2, 7}, {0, 1, 0, 1, 1, 0, 0}), 1.5);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(ReallocateExact, VarianceMatchesAdditiveFormula) {
  const auto s = make({4, 9, 1, 7, 2, 8, 5, 3, 6}, {1, 1, 1, 1, 0, 0, 0, 0, 0});
  for (double a : {-3.0, 0.0, 1.0, 2.5, 8.0}) {
    const double v = theory::var_reallocate_additive(grand_variance(s), diff_in_means(s), a, 4, 5);
    EXPECT_NEAR(population_variance(reallocate_exact(s, a)), v, 1e-10 * std::max(1.0, v));
  }
}

TEST(ReallocateMc, SleepStandardError) {
  const auto d = reallocate_mc(siminfer::testing::sleep(), 0.0, 1'000'000, 2024);
  const auto s = summarize(d, "reallocate", 2024);
  EXPECT_NEAR(s.std_error, 1.505, 0.005);
  EXPECT_LT(std::abs(s.mean), 4 * s.std_error / 1000.0);
  EXPECT_NEAR(s.skewness, 0.0, 0.01);
}

TEST(ReallocateMc, AcsStandardError) {
  const auto d = reallocate_mc(siminfer::testing::acs(), 0.0, 1'000'000, 2025);
  EXPECT_NEAR(summarize(d, "reallocate", 2025).std_error, 5.034, 0.02);
}

TEST(ResamplePooled, SleepStandardErrorAndConstantData) {
  const auto d = resample_pooled(siminfer::testing::sleep(), 1'000'000, 77);
  const auto s = summarize(d, "resample-pooled", 77);
  EXPECT_NEAR(s.std_error, 1.473, 0.005);
  EXPECT_NEAR(s.skewness, 0.0, 0.01);
  for (double x : resample_pooled(make({2, 2, 2, 2, 2}, {1, 1, 0, 0, 0}), 100, 1)) EXPECT_EQ(x, 0.0);
}

TEST(ResamplePooled, AcsStandardError) {
  const auto d = resample_pooled(siminfer::testing::acs(), 1'000'000, 78);
  EXPECT_NEAR(summarize(d, "resample-pooled", 78).std_error, 5.028, 0.02);
}

TEST(ResampleWithin, StandardErrors) {
  EXPECT_NEAR(summarize(resample_within(siminfer::testing::sleep(), 1'000'000, 5), "w", 5).std_error, 1.340, 0.005);
  EXPECT_NEAR(summarize(resample_within(siminfer::testing::acs(), 1'000'000, 6), "w", 6).std_error, 4.962, 0.02);
}

TEST(ResampleEqualMeans, IsWithinShiftedByTauHat) {
  const auto s = siminfer::testing::sleep();
  const double tau = diff_in_means(s);
  const auto within = resample_within(s, 100000, 9);
  const auto equal = resample_equal_means(s, 0.0, 100000, 9);
  for (std::size_t i = 0; i < within.size(); ++i) ASSERT_NEAR(equal[i], within[i] - tau, 1e-9);
}

TEST(ResampleEqualMeans, LevelIsIrrelevant) {
  const auto s = siminfer::testing::acs();
  const auto b0 = resample_equal_means(s, 0.0, 100000, 10);
  const auto b7 = resample_equal_means(s, 7.0, 100000, 10);
  for (std::size_t i = 0; i < b0.size(); ++i) ASSERT_NEAR(b0[i], b7[i], 1e-9);
}

TEST(ResampleEqualMeans, SleepCentredWithWithinSpread) {
  const auto s = summarize(resample_equal_means(siminfer::testing::sleep(), 0.0, 1'000'000, 12), "e", 12);
  EXPECT_NEAR(s.std_error, 1.340, 0.005);
  EXPECT_LT(std::abs(s.mean), 4 * s.std_error / 1000.0);
}

TEST(Determinism, IndependentOfWorkerCount) {
  const auto s = siminfer::testing::acs();
  const auto one = reallocate_mc(s, 4.0, 50000, 3, {1});
  const auto four = reallocate_mc(s, 4.0, 50000, 3, {4});
  const auto seven = reallocate_mc(s, 4.0, 50000, 3, {7});
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, seven);
  EXPECT_EQ(resample_within(s, 50000, 3, {1}), resample_within(s, 50000, 3, {5}));
  EXPECT_EQ(resample_pooled(s, 50000, 3, {1}), resample_pooled(s, 50000, 3, {3}));
}

TEST(Plan, RejectsInvalidCombinations) {
  SimulationPlan p;
  p.method = Method::reallocate;
  p.hypothesis = EqualMeans{0.0};
  EXPECT_THROW(validate_plan(p), ValidationError);
  p.hypothesis = std::nullopt;
  EXPECT_THROW(validate_plan(p), ValidationError);
  p.method = Method::resample_pooled;
  p.hypothesis = AdditiveShift{1.0};
  EXPECT_THROW(validate_plan(p), ValidationError);
  p.method = Method::resample_within;
  p.hypothesis = SharpNull{};
  EXPECT_THROW(validate_plan(p), ValidationError);
  p.hypothesis = EqualMeans{0.0};
  EXPECT_NO_THROW(validate_plan(p));
  p.hypothesis = std::nullopt;
  EXPECT_NO_THROW(validate_plan(p));
}

TEST(Simulate, UsesEnumerationWhenSmall) {
  const auto s = make({4, 9, 1, 7, 2, 8}, {1, 1, 1, 0, 0, 0});
  SimulationPlan p;
  const auto d = simulate(s, p);
  EXPECT_TRUE(d.exact);
  EXPECT_EQ(d.draws.size(), 20u);
  EXPECT_FALSE(d.summary.seed.has_value());
  p.exact_threshold = 10;
  p.replicates = 1000;
  const auto mc = simulate(s, p);
  EXPECT_FALSE(mc.exact);
  EXPECT_EQ(mc.summary.seed, 42u);
}

TEST(Simulate, EqualMeansTag) {
  SimulationPlan p;
  p.method = Method::resample_within;
  p.hypothesis = EqualMeans{0.0};
  p.replicates = 1000;
  EXPECT_EQ(simulate(siminfer::testing::sleep(), p).summary.method_tag, "resample-equal-means");
}

TEST(Draws, BinaryRoundTrip) {
  const std::vector<double> d = {0.0, -1.5, 3.25e100, std::numeric_limits<double>::denorm_min()};
  std::stringstream buf;
  write_draws_binary(buf, d);
  EXPECT_EQ(buf.str().size(), 32u);
  EXPECT_EQ(read_draws_binary(buf), d);
}

TEST(Draws, VarianceMatchesTheoryWithinFiveStandardErrors) {
  const auto s = siminfer::testing::acs();
  const std::size_t reps = 1'000'000;
  struct Case {
    std::vector<double> draws;
    double v;
  };
  const std::vector<Case> cases = {
      {resample_pooled(s, reps, 31), theory::var_sharp_resample(grand_variance(s), 214, 217)},
      {resample_within(s, reps, 32), theory::var_estimation_resample(group_variance(s, 1), group_variance(s, 0), 214, 217)},
      {reallocate_mc(s, 10.0, reps, 33),
       theory::var_reallocate_additive(grand_variance(s), diff_in_means(s), 10.0, 214, 217)},
  };
  for (const auto& c : cases) {
    const auto sum = summarize(c.draws, "x", 0);
    EXPECT_NEAR(sum.variance, c.v, 5 * c.v * std::sqrt((sum.excess_kurtosis + 2.0) / reps));
  }
}
