#pragma once

// Simulated distributions of the difference in means: exact enumeration of
// reallocations, Monte Carlo reallocation, and pooled / within-group
// bootstrap resampling.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <bit>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "siminfer/errors.hpp"
#include "siminfer/moments.hpp"
#include "siminfer/random.hpp"
#include "siminfer/sample.hpp"

namespace siminfer {

inline constexpr std::uint64_t kDefaultExactThreshold = 200'000;

/// n choose k, or nullopt when it does not fit in 64 bits.
inline std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  detail::uint128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  }
  return static_cast<std::uint64_t>(r);
}

/// Both potential outcomes for every unit.
class PotentialOutcomeTable {
 public:
  PotentialOutcomeTable(std::vector<double> y1, std::vector<double> y0) : y1_(std::move(y1)), y0_(std::move(y0)) {
    if (y1_.size() != y0_.size()) throw ValidationError("potential outcome columns differ in length");
    if (y1_.size() < 2) throw ValidationError("potential outcome table needs at least 2 units");
    for (std::size_t i = 0; i < y1_.size(); ++i)
      if (!std::isfinite(y1_[i]) || !std::isfinite(y0_[i]))
        throw ValidationError("potential outcome " + std::to_string(i + 1) + " is not finite");
  }

  std::span<const double> y1() const noexcept { return y1_; }
  std::span<const double> y0() const noexcept { return y0_; }
  std::span<const double> column(int w) const noexcept { return w ? y1_ : y0_; }
  std::size_t n() const noexcept { return y1_.size(); }

  /// s*_w^2: variance of Y(w) across all units, divisor n - 1.
  double s_star2(int w) const { return detail::sum_sq_dev(column(w)) / static_cast<double>(n() - 1); }

  /// s*_{1-0}^2: variance of the unit-level effects Y(1) - Y(0), divisor n - 1.
  double effect_variance() const {
    std::vector<double> d(n());
    for (std::size_t i = 0; i < n(); ++i) d[i] = y1_[i] - y0_[i];
    return detail::sum_sq_dev(d) / static_cast<double>(n() - 1);
  }

 private:
  std::vector<double> y1_;
  std::vector<double> y0_;
};

/// Fills in the missing potential outcomes under Y(1) = Y(0) + a.
inline PotentialOutcomeTable impute_additive(const TwoGroupSample& sample, double a) {
  std::vector<double> y1(sample.n()), y0(sample.n());
  for (std::size_t i = 0; i < sample.n(); ++i) {
    const double y = sample.outcomes()[i];
    if (sample.assignments()[i]) {
      y1[i] = y;
      y0[i] = y - a;
    } else {
      y1[i] = y + a;
      y0[i] = y;
    }
  }
  return PotentialOutcomeTable(std::move(y1), std::move(y0));
}

/// How many threads a simulation may use. Results never depend on it.
struct ExecutionOptions {
  unsigned workers = 1;
};

namespace detail {

/// Runs body(begin, end) over contiguous slices of [0, count).
template <class Body>
void parallel_slices(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2 * static_cast<std::size_t>(workers)) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t slice = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * slice);
    const std::size_t end = std::min(count, begin + slice);
    if (begin == end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

/// Reallocation draws for the table (y1, y0) with n1 treated units.
/// Replicate r draws its subset from StreamRng(seed, r) by a partial
/// Fisher-Yates shuffle of the smaller group's slots.
inline void reallocation_kernel(std::span<const double> y1, std::span<const double> y0, std::size_t n1,
                                std::uint64_t seed, std::span<double> out, ExecutionOptions opts) {
  const std::size_t n = y1.size();
  const std::size_t n0 = n - n1;
  const bool pick_treated = n1 <= n0;
  const std::size_t k = pick_treated ? n1 : n0;
  const double total1 = std::accumulate(y1.begin(), y1.end(), 0.0);
  const double total0 = std::accumulate(y0.begin(), y0.end(), 0.0);
  const double d1 = static_cast<double>(n1);
  const double d0 = static_cast<double>(n0);

  parallel_slices(out.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> fresh(n), idx(n);
    std::iota(fresh.begin(), fresh.end(), 0u);
    for (std::size_t r = begin; r < end; ++r) {
      std::memcpy(idx.data(), fresh.data(), n * sizeof(std::uint32_t));
      StreamRng rng(seed, r);
      double sub1 = 0.0, sub0 = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = j + rng.below(n - j);
        std::swap(idx[j], idx[pick]);
        sub1 += y1[idx[j]];
        sub0 += y0[idx[j]];
      }
      out[r] = pick_treated ? sub1 / d1 - (total0 - sub0) / d0 : (total1 - sub1) / d1 - sub0 / d0;
    }
  });
}

}  // namespace detail

/// One draw per distinct allocation of n1 treated labels, in lexicographic
/// order of the treated index set.
inline std::vector<double> reallocate_exact(const PotentialOutcomeTable& table, std::size_t n1,
                                            std::uint64_t exact_threshold = kDefaultExactThreshold) {
  const std::size_t n = table.n();
  if (n1 == 0 || n1 >= n) throw ValidationError("reallocation needs 0 < n1 < n");
  const auto count = binomial(n, n1);
  if (!count || *count > exact_threshold)
    throw EnumerationLimitError("C(" + std::to_string(n) + ", " + std::to_string(n1) +
                                ") allocations exceed the exact threshold of " + std::to_string(exact_threshold) +
                                "; use Monte Carlo reallocation");
  const auto y1 = table.y1();
  const auto y0 = table.y0();
  const double d1 = static_cast<double>(n1);
  const double d0 = static_cast<double>(n - n1);

  std::vector<double> out;
  out.reserve(*count);
  std::vector<std::size_t> chosen(n1);
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  std::vector<std::uint8_t> treated(n, 0);
  while (true) {
    std::fill(treated.begin(), treated.end(), 0);
    for (auto i : chosen) treated[i] = 1;
    double s1 = 0.0, s0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) (treated[i] ? s1 += y1[i] : s0 += y0[i]);
    out.push_back(s1 / d1 - s0 / d0);

    // advance to the next combination
    std::size_t j = n1;
    while (j > 0 && chosen[j - 1] == n - n1 + (j - 1)) --j;
    if (j == 0) break;
    ++chosen[j - 1];
    for (std::size_t m = j; m < n1; ++m) chosen[m] = chosen[m - 1] + 1;
  }
  return out;
}

/// Exact reallocation distribution of the sample under Y(1) = Y(0) + a.
inline std::vector<double> reallocate_exact(const TwoGroupSample& sample, double a,
                                            std::uint64_t exact_threshold = kDefaultExactThreshold) {
  return reallocate_exact(impute_additive(sample, a), sample.n1(), exact_threshold);
}

inline std::vector<double> reallocate_mc(const PotentialOutcomeTable& table, std::size_t n1, std::size_t replicates,
                                         std::uint64_t seed, ExecutionOptions opts = {}) {
  if (replicates < 1) throw ValidationError("replicates must be at least 1");
  if (n1 == 0 || n1 >= table.n()) throw ValidationError("reallocation needs 0 < n1 < n");
  std::vector<double> out(replicates);
  detail::reallocation_kernel(table.y1(), table.y0(), n1, seed, out, opts);
  return out;
}

/// Monte Carlo reallocation under Y(1) = Y(0) + a; a = 0 is the sharp null.
inline std::vector<double> reallocate_mc(const TwoGroupSample& sample, double a, std::size_t replicates,
                                         std::uint64_t seed, ExecutionOptions opts = {}) {
  if (replicates < 1) throw ValidationError("replicates must be at least 1");
  std::vector<double> out(replicates);
  if (a == 0.0) {
    detail::reallocation_kernel(sample.outcomes(), sample.outcomes(), sample.n1(), seed, out, opts);
  } else {
    const auto table = impute_additive(sample, a);
    detail::reallocation_kernel(table.y1(), table.y0(), sample.n1(), seed, out, opts);
  }
  return out;
}

namespace detail {

/// Draws n1 values from `from1` and n0 from `from0` with replacement, per replicate.
inline std::vector<double> bootstrap_kernel(std::span<const double> from1, std::size_t n1,
                                            std::span<const double> from0, std::size_t n0, std::size_t replicates,
                                            std::uint64_t seed, ExecutionOptions opts) {
  if (replicates < 1) throw ValidationError("replicates must be at least 1");
  std::vector<double> out(replicates);
  const double d1 = static_cast<double>(n1);
  const double d0 = static_cast<double>(n0);
  parallel_slices(replicates, opts.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      StreamRng rng(seed, r);
      double s1 = 0.0, s0 = 0.0;
      for (std::size_t j = 0; j < n1; ++j) s1 += from1[rng.below(from1.size())];
      for (std::size_t j = 0; j < n0; ++j) s0 += from0[rng.below(from0.size())];
      out[r] = s1 / d1 - s0 / d0;
    }
  });
  return out;
}

}  // namespace detail

/// Sharp-null bootstrap: both groups drawn with replacement from all n outcomes.
inline std::vector<double> resample_pooled(const TwoGroupSample& sample, std::size_t replicates, std::uint64_t seed,
                                           ExecutionOptions opts = {}) {
  return detail::bootstrap_kernel(sample.outcomes(), sample.n1(), sample.outcomes(), sample.n0(), replicates, seed,
                                  opts);
}

/// Estimation bootstrap: each group resampled from its own outcomes.
inline std::vector<double> resample_within(const TwoGroupSample& sample, std::size_t replicates, std::uint64_t seed,
                                           ExecutionOptions opts = {}) {
  return detail::bootstrap_kernel(sample.group(1), sample.n1(), sample.group(0), sample.n0(), replicates, seed, opts);
}

/// Equal-means null: shift treated by -tau/2 + b and control by +tau/2 + b,
/// then resample within groups. b cancels in the difference.
inline std::vector<double> resample_equal_means(const TwoGroupSample& sample, double b, std::size_t replicates,
                                                std::uint64_t seed, ExecutionOptions opts = {}) {
  const double tau = diff_in_means(sample);
  std::vector<double> shifted1(sample.group(1).begin(), sample.group(1).end());
  std::vector<double> shifted0(sample.group(0).begin(), sample.group(0).end());
  for (auto& y : shifted1) y = y - tau / 2.0 + b;
  for (auto& y : shifted0) y = y + tau / 2.0 + b;
  return detail::bootstrap_kernel(shifted1, sample.n1(), shifted0, sample.n0(), replicates, seed, opts);
}

enum class Method { reallocate, resample_pooled, resample_within };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::reallocate:
      return "reallocate";
    case Method::resample_pooled:
      return "resample-pooled";
    case Method::resample_within:
      return "resample-within";
  }
  return "?";
}

/// A simulation request. An empty hypothesis means estimation mode.
struct SimulationPlan {
  Method method = Method::reallocate;
  std::optional<Hypothesis> hypothesis = SharpNull{};
  std::size_t replicates = 1'000'000;
  std::uint64_t seed = 42;
  std::uint64_t exact_threshold = kDefaultExactThreshold;
};

/// Rejects method/hypothesis pairs that have no valid simulation.
inline void validate_plan(const SimulationPlan& plan) {
  if (plan.replicates < 1) throw ValidationError("replicates must be at least 1");
  const auto& h = plan.hypothesis;
  switch (plan.method) {
    case Method::reallocate:
      if (!h) throw ValidationError("reallocation needs a hypothesis that fixes both potential outcomes");
      if (std::holds_alternative<EqualMeans>(*h))
        throw ValidationError(
            "reallocation cannot test equal means: it needs every unit's potential outcomes, which only a sharp or "
            "additive null supplies; use resample-within");
      break;
    case Method::resample_pooled:
      if (!h || !std::holds_alternative<SharpNull>(*h))
        throw ValidationError("pooled resampling draws from the combined sample and is valid only under the sharp null");
      break;
    case Method::resample_within:
      if (h && !std::holds_alternative<EqualMeans>(*h))
        throw ValidationError("within-group resampling supports the equal-means null or estimation mode only");
      break;
  }
}

struct SimulatedDistribution {
  std::vector<double> draws;
  DistributionSummary summary;
  bool exact = false;
};

/// Runs a validated plan. Reallocation switches to full enumeration when the
/// number of allocations is within plan.exact_threshold.
inline SimulatedDistribution simulate(const TwoGroupSample& sample, const SimulationPlan& plan,
                                      ExecutionOptions opts = {}) {
  validate_plan(plan);
  SimulatedDistribution out;
  std::string tag = to_string(plan.method);
  switch (plan.method) {
    case Method::reallocate: {
      const double a = *implied_shift(*plan.hypothesis);
      const auto count = binomial(sample.n(), sample.n1());
      if (count && *count <= plan.exact_threshold) {
        out.draws = reallocate_exact(sample, a, plan.exact_threshold);
        out.exact = true;
      } else {
        out.draws = reallocate_mc(sample, a, plan.replicates, plan.seed, opts);
      }
      break;
    }
    case Method::resample_pooled:
      out.draws = resample_pooled(sample, plan.replicates, plan.seed, opts);
      break;
    case Method::resample_within:
      if (plan.hypothesis) {
        out.draws = resample_equal_means(sample, std::get<EqualMeans>(*plan.hypothesis).b, plan.replicates, plan.seed,
                                         opts);
        tag = "resample-equal-means";
      } else {
        out.draws = resample_within(sample, plan.replicates, plan.seed, opts);
      }
      break;
  }
  std::optional<std::uint64_t> seed;
  if (!out.exact) seed = plan.seed;
  out.summary = summarize(out.draws, std::move(tag), seed);
  return out;
}

/// Writes draws as consecutive little-endian IEEE-754 doubles.
inline void write_draws_binary(std::ostream& os, std::span<const double> draws) {
  for (double d : draws) {
    auto bits = std::bit_cast<std::uint64_t>(d);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    os.write(bytes, 8);
  }
}

inline std::vector<double> read_draws_binary(std::istream& is) {
  std::vector<double> out;
  char bytes[8];
  while (is.read(bytes, 8)) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.push_back(std::bit_cast<double>(bits));
  }
  return out;
}

}  // namespace siminfer
