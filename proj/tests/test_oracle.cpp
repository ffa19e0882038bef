#include <gtest/gtest.h>

#include <random>

#include "siminfer/oracle.hpp"
#include "support.hpp"

using namespace siminfer;
using siminfer::testing::make;

namespace {

const PotentialOutcomeTable kTable({2, 1, 5, 3, 9}, {1, 2, 3, 4, 5});

}  // namespace

TEST(Enumerate, Counts) {
  EXPECT_EQ(oracle::enumerate_allocations(4, 2).size(), 6u);
  EXPECT_EQ(oracle::enumerate_allocations(5, 2).size(), 10u);
  EXPECT_EQ(oracle::allocation_count(24, 12), 2704156u);
  EXPECT_THROW(oracle::enumerate_allocations(24, 12), EnumerationLimitError);
}

TEST(Enumerate, EachVectorHasN1Ones) {
  for (const auto& w : oracle::enumerate_allocations(7, 3)) EXPECT_EQ(std::count(w.begin(), w.end(), 1), 3);
}

TEST(Covariance, MatchesClosedForm) {
  EXPECT_LE(oracle::allocation_covariance_check(4, 2), 1e-12);
  EXPECT_LE(oracle::allocation_covariance_check(2, 1), 1e-12);
  EXPECT_LE(oracle::allocation_covariance_check(6, 2), 1e-12);
  EXPECT_LE(oracle::allocation_covariance_check(9, 4), 1e-12);
}

TEST(Estimand, TableValues) {
  EXPECT_DOUBLE_EQ(oracle::estimand_tau_ra(kTable), 1.0);
  EXPECT_DOUBLE_EQ(oracle::estimand_tau_ra(PotentialOutcomeTable({2, 0, 5}, {1, 1, 5})), 0.0);
  const auto s = make({1, 4, 2, 8, 5}, {1, 0, 1, 0, 0});
  EXPECT_NEAR(oracle::estimand_tau_ra(impute_additive(s, 2.5)), 2.5, 1e-15);
}

TEST(TrueVariance, NeymanFormulaIsExact) {
  const double v = oracle::true_allocation_variance(kTable, 2);
  const double formula =
      theory::var_estimation_random_allocation(kTable.s_star2(1), kTable.s_star2(0), kTable.effect_variance(), 2, 3);
  EXPECT_NEAR(v, formula, 1e-10 * formula);
}

TEST(TrueVariance, AdditiveTableMatchesImputedForm) {
  const auto s = make({4, 9, 1, 7, 2, 8, 5}, {1, 1, 1, 0, 0, 0, 0});
  for (double a : {-1.0, 0.0, 2.0}) {
    const double v = oracle::true_allocation_variance(impute_additive(s, a), 3);
    const double formula = theory::var_reallocate_additive(grand_variance(s), diff_in_means(s), a, 3, 4);
    EXPECT_NEAR(v, formula, 1e-10 * formula);
  }
}

TEST(TrueVariance, ZeroEffectIsSharpNullFormula) {
  const PotentialOutcomeTable t({3, 1, 4, 1, 5, 9}, {3, 1, 4, 1, 5, 9});
  const double v = oracle::true_allocation_variance(t, 2);
  EXPECT_NEAR(v, theory::var_sharp_reallocate(t.s_star2(0), 2, 4), 1e-12);
}

TEST(TrueVariance, EngineEnumerationAgrees) {
  auto engine = reallocate_exact(kTable, 2);
  auto oracle_draws = oracle::allocation_draws(kTable, 2);
  EXPECT_EQ(engine, oracle_draws);
}

TEST(RepeatedSampling, UnitVariancePopulations) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  std::vector<double> g1(20000), g0(20000);
  for (auto& x : g1) x = z(gen);
  for (auto& x : g0) x = 3.0 + z(gen);
  const auto pop = oracle::SyntheticPopulation::from_values(g1, g0);
  const auto r = oracle::repeated_sampling_variance(pop, 25, 25, 100000, 2);
  const double expected = theory::var_estimation_random_sampling(pop.sigma1_2, pop.sigma0_2, 25, 25);
  EXPECT_NEAR(expected, 0.08, 0.003);
  EXPECT_NEAR(r.variance, expected, 5 * r.std_error);
}

TEST(RepeatedSampling, UnequalVariances) {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> e(0.25);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  std::vector<double> g1(30000), g0(30000);
  for (auto& x : g1) x = e(gen);
  for (auto& x : g0) x = u(gen);
  const auto pop = oracle::SyntheticPopulation::from_values(g1, g0);
  const auto r = oracle::repeated_sampling_variance(pop, 15, 40, 200000, 4);
  EXPECT_NEAR(r.variance, theory::var_estimation_random_sampling(pop.sigma1_2, pop.sigma0_2, 15, 40),
              5 * r.std_error);
}

TEST(RepeatedSampling, SharedPopulationMatchesSharpFormula) {
  std::mt19937_64 gen(5);
  std::lognormal_distribution<double> ln(0.0, 0.5);
  std::vector<double> v(50000);
  for (auto& x : v) x = ln(gen);
  const auto pop = oracle::SyntheticPopulation::shared(v);
  const auto r = oracle::repeated_sampling_variance(pop, 10, 14, 200000, 6);
  EXPECT_NEAR(r.variance, theory::var_sharp_random_sampling(pop.sigma2, 10, 14), 5 * r.std_error);
}

TEST(RepeatedSampling, DegeneratePopulation) {
  const auto pop = oracle::SyntheticPopulation::shared(std::vector<double>(100, 2.0));
  EXPECT_EQ(oracle::repeated_sampling_variance(pop, 5, 5, 10000, 1).variance, 0.0);
  EXPECT_THROW(oracle::repeated_sampling_variance(pop, 5, 5, 100, 1), ValidationError);
}
