#pragma once

// Brute-force ground truth for the closed-form results. Everything here is
// written independently of engine.hpp (own enumeration, own arithmetic, own
// random source) so that agreement between the two is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "siminfer/engine.hpp"
#include "siminfer/errors.hpp"

namespace siminfer::oracle {

using Assignment = std::vector<std::uint8_t>;

/// C(n, k) from Pascal's triangle; nullopt if any entry overflows 64 bits.
inline std::optional<std::uint64_t> allocation_count(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::vector<std::uint64_t> row(k + 1, 0);
  row[0] = 1;
  bool overflow = false;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = std::min(i, k); j >= 1; --j) {
      std::uint64_t sum;
      if (__builtin_add_overflow(row[j], row[j - 1], &sum)) overflow = true;
      row[j] = sum;
    }
  }
  if (overflow) return std::nullopt;
  return row[k];
}

namespace detail {

inline void check_enumerable(std::size_t n, std::size_t n1, std::uint64_t threshold) {
  const auto count = allocation_count(n, n1);
  if (!count || *count > threshold)
    throw EnumerationLimitError("too many allocations to enumerate: C(" + std::to_string(n) + ", " +
                                std::to_string(n1) + ")");
}

inline void recurse(std::size_t start, std::size_t remaining, Assignment& w,
                    const std::function<void(const Assignment&)>& visit) {
  if (remaining == 0) {
    visit(w);
    return;
  }
  for (std::size_t i = start; i + remaining <= w.size(); ++i) {
    w[i] = 1;
    recurse(i + 1, remaining - 1, w, visit);
    w[i] = 0;
  }
}

}  // namespace detail

/// Calls visit(w) once for every assignment vector with n1 ones, in
/// lexicographic order of the treated index sets.
inline void for_each_allocation(std::size_t n, std::size_t n1, const std::function<void(const Assignment&)>& visit,
                                std::uint64_t threshold = kDefaultExactThreshold) {
  detail::check_enumerable(n, n1, threshold);
  Assignment w(n, 0);
  detail::recurse(0, n1, w, visit);
}

inline std::vector<Assignment> enumerate_allocations(std::size_t n, std::size_t n1,
                                                     std::uint64_t threshold = kDefaultExactThreshold) {
  std::vector<Assignment> out;
  for_each_allocation(n, n1, [&](const Assignment& w) { out.push_back(w); }, threshold);
  return out;
}

/// Largest deviation of the enumerated covariance of W from
/// p(1-p) on the diagonal and -p(1-p)/(n-1) off it.
inline double allocation_covariance_check(std::size_t n, std::size_t n1) {
  const auto all = enumerate_allocations(n, n1);
  const double count = static_cast<double>(all.size());
  std::vector<double> mean(n, 0.0);
  for (const auto& w : all)
    for (std::size_t i = 0; i < n; ++i) mean[i] += w[i];
  for (auto& m : mean) m /= count;

  const double p = static_cast<double>(n1) / static_cast<double>(n);
  const double diag = p * (1.0 - p);
  const double off = -p * (1.0 - p) / static_cast<double>(n - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double c = 0.0;
      for (const auto& w : all) c += (w[i] - mean[i]) * (w[j] - mean[j]);
      c /= count;
      worst = std::max(worst, std::abs(c - (i == j ? diag : off)));
    }
  }
  return worst;
}

/// Difference in means observed under assignment w, read from the table.
inline double observed_statistic(const PotentialOutcomeTable& table, const Assignment& w) {
  double sum1 = 0.0, sum0 = 0.0;
  std::size_t c1 = 0, c0 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i]) {
      sum1 += table.y1()[i];
      ++c1;
    } else {
      sum0 += table.y0()[i];
      ++c0;
    }
  }
  return sum1 / static_cast<double>(c1) - sum0 / static_cast<double>(c0);
}

/// The statistic under every allocation, in enumeration order.
inline std::vector<double> allocation_draws(const PotentialOutcomeTable& table, std::size_t n1,
                                            std::uint64_t threshold = kDefaultExactThreshold) {
  std::vector<double> out;
  for_each_allocation(table.n(), n1, [&](const Assignment& w) { out.push_back(observed_statistic(table, w)); },
                      threshold);
  return out;
}

/// Exact variance of the difference in means over all allocations.
inline double true_allocation_variance(const PotentialOutcomeTable& table, std::size_t n1) {
  const auto draws = allocation_draws(table, n1);
  long double mean = 0.0L;
  for (double d : draws) mean += d;
  mean /= static_cast<long double>(draws.size());
  long double ss = 0.0L;
  for (double d : draws) ss += (d - mean) * (d - mean);
  return static_cast<double>(ss / static_cast<long double>(draws.size()));
}

/// Average unit-level effect over the sample.
inline double estimand_tau_ra(const PotentialOutcomeTable& table) {
  double s = 0.0;
  for (std::size_t i = 0; i < table.n(); ++i) s += table.y1()[i] - table.y0()[i];
  return s / static_cast<double>(table.n());
}

/// A large finite population per group; its moments (divisor = size) are the
/// true parameters.
struct SyntheticPopulation {
  std::vector<double> group1_values;
  std::vector<double> group0_values;
  double mu1 = 0.0, mu0 = 0.0;
  double sigma1_2 = 0.0, sigma0_2 = 0.0;
  double sigma2 = 0.0;  // variance of both groups combined

  static SyntheticPopulation from_values(std::vector<double> g1, std::vector<double> g0) {
    if (g1.empty() || g0.empty()) throw ValidationError("population groups must be non-empty");
    auto moments = [](const std::vector<double>& v, double& mu, double& var) {
      long double s = 0.0L;
      for (double x : v) s += x;
      mu = static_cast<double>(s / v.size());
      long double ss = 0.0L;
      for (double x : v) ss += (x - mu) * (x - mu);
      var = static_cast<double>(ss / v.size());
    };
    SyntheticPopulation pop;
    moments(g1, pop.mu1, pop.sigma1_2);
    moments(g0, pop.mu0, pop.sigma0_2);
    std::vector<double> all(g1);
    all.insert(all.end(), g0.begin(), g0.end());
    double mu = 0.0;
    moments(all, mu, pop.sigma2);
    pop.group1_values = std::move(g1);
    pop.group0_values = std::move(g0);
    return pop;
  }

  /// Both groups draw from the same population (the sharp null).
  static SyntheticPopulation shared(std::vector<double> values) {
    auto copy = values;
    return from_values(std::move(values), std::move(copy));
  }
};

struct RepeatedSamplingResult {
  double variance = 0.0;
  double std_error = 0.0;  // Monte Carlo SE of `variance`
};

/// Variance of the difference in means over repeated stratified draws with
/// replacement from the population.
inline RepeatedSamplingResult repeated_sampling_variance(const SyntheticPopulation& pop, std::size_t n1,
                                                         std::size_t n0, std::size_t draws, std::uint64_t seed) {
  if (draws < 10'000) throw ValidationError("repeated sampling needs at least 10^4 draws");
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick1(0, pop.group1_values.size() - 1);
  std::uniform_int_distribution<std::size_t> pick0(0, pop.group0_values.size() - 1);
  std::vector<double> stats(draws);
  for (auto& t : stats) {
    double s1 = 0.0, s0 = 0.0;
    for (std::size_t j = 0; j < n1; ++j) s1 += pop.group1_values[pick1(gen)];
    for (std::size_t j = 0; j < n0; ++j) s0 += pop.group0_values[pick0(gen)];
    t = s1 / static_cast<double>(n1) - s0 / static_cast<double>(n0);
  }
  double mean = 0.0;
  for (double t : stats) mean += t;
  mean /= static_cast<double>(draws);
  double m2 = 0.0, m4 = 0.0;
  for (double t : stats) {
    const double d2 = (t - mean) * (t - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(draws);
  m4 /= static_cast<double>(draws);
  return {m2, std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(draws))};
}

}  // namespace siminfer::oracle
