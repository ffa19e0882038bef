#pragma once

// p-values and the four interval constructions compared for two-group data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "siminfer/engine.hpp"
#include "siminfer/errors.hpp"
#include "siminfer/moments.hpp"
#include "siminfer/random.hpp"
#include "siminfer/report.hpp"
#include "siminfer/sample.hpp"
#include "siminfer/theory.hpp"

namespace siminfer {

/// Draws within this distance of the observed value count as ties. Sums of the
/// same outcomes in a different order can differ in the last bits.
inline double tie_tolerance(double observed) { return 1e-9 * std::max(1.0, std::abs(observed)); }

/// Number of draws at least as extreme as `observed` in the given tail.
inline std::uint64_t count_extreme(std::span<const double> draws, double observed, Tail tail) {
  const double eps = tie_tolerance(observed);
  std::uint64_t k = 0;
  switch (tail) {
    case Tail::right:
      for (double d : draws) k += d >= observed - eps;
      break;
    case Tail::left:
      for (double d : draws) k += d <= observed + eps;
      break;
    case Tail::two_sided: {
      const double bound = std::abs(observed) - eps;
      for (double d : draws) k += std::abs(d) >= bound;
      break;
    }
  }
  return k;
}

/// Proportion of draws as or more extreme than `observed`. The add_one
/// convention uses (k + 1) / (reps + 1) and never returns 0.
inline InferenceReport p_value(std::span<const double> draws, double observed, Tail tail,
                               Convention convention = Convention::plain_proportion) {
  if (draws.empty()) throw ValidationError("p_value needs at least one draw");
  const auto k = static_cast<double>(count_extreme(draws, observed, tail));
  const auto reps = static_cast<double>(draws.size());
  InferenceReport r;
  r.kind = ReportKind::p_value;
  r.p = convention == Convention::add_one ? (k + 1.0) / (reps + 1.0) : k / reps;
  r.tail = tail;
  r.convention = convention;
  r.replicates = draws.size();
  r.estimate = observed;
  return r;
}

/// Two-sided critical value of Student's t.
inline double t_critical(double level, double df) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

/// Degrees of freedom used for every t-based interval: min(n1, n0) - 1.
inline double interval_df(const TwoGroupSample& sample) {
  return static_cast<double>(std::min(sample.n1(), sample.n0()) - 1);
}

namespace detail {

inline void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
}

inline InferenceReport t_interval(const TwoGroupSample& sample, double level, double se, std::string method,
                                  std::size_t replicates, std::uint64_t seed) {
  const double tau = diff_in_means(sample);
  const double margin = t_critical(level, interval_df(sample)) * se;
  InferenceReport r;
  r.kind = ReportKind::interval;
  r.lower = tau - margin;
  r.upper = tau + margin;
  r.tail = Tail::two_sided;
  r.level = level;
  r.method = std::move(method);
  r.replicates = replicates;
  r.seed = seed;
  r.estimate = tau;
  r.std_error = se;
  return r;
}

}  // namespace detail

/// tau_hat +/- t* SE with SE from within-group resampling.
inline InferenceReport ci_bootstrap_t(const TwoGroupSample& sample, double level, std::size_t replicates,
                                      std::uint64_t seed, ExecutionOptions opts = {}) {
  detail::require_level(level);
  const auto draws = resample_within(sample, replicates, seed, opts);
  const auto summary = summarize(draws, "resample-within", seed);
  return detail::t_interval(sample, level, summary.std_error, "bootstrap-t", replicates, seed);
}

/// tau_hat +/- t* SE with SE from the sharp-null reallocation distribution.
/// Reported for comparison only; the sharp-null SE ignores the hypothesized effect.
inline InferenceReport ci_reallocation_sharp_se(const TwoGroupSample& sample, double level, std::size_t replicates,
                                                std::uint64_t seed, ExecutionOptions opts = {}) {
  detail::require_level(level);
  const auto draws = reallocate_mc(sample, 0.0, replicates, seed, opts);
  const auto summary = summarize(draws, "reallocate", seed);
  auto r = detail::t_interval(sample, level, summary.std_error, "reallocation-sharp-se", replicates, seed);
  r.recommended = false;
  return r;
}

/// Empirical quantile with linear interpolation between order statistics
/// (h = (N - 1) q). `sorted` must be ascending.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile interval from within-group resampling draws.
inline InferenceReport ci_bootstrap_percentile(std::span<const double> draws, double level) {
  detail::require_level(level);
  if (static_cast<double>(draws.size()) < 2.0 / (1.0 - level))
    throw ValidationError("too few draws for stable quantiles at this level");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 1.0 - level;
  InferenceReport r;
  r.kind = ReportKind::interval;
  r.lower = quantile_sorted(sorted, alpha / 2.0);
  r.upper = quantile_sorted(sorted, 1.0 - alpha / 2.0);
  r.tail = Tail::two_sided;
  r.level = level;
  r.method = "bootstrap-percentile";
  r.replicates = draws.size();
  return r;
}

inline InferenceReport ci_bootstrap_percentile(const TwoGroupSample& sample, double level, std::size_t replicates,
                                               std::uint64_t seed, ExecutionOptions opts = {}) {
  auto r = ci_bootstrap_percentile(resample_within(sample, replicates, seed, opts), level);
  r.seed = seed;
  r.estimate = diff_in_means(sample);
  return r;
}

/// Outcome of inverting the additive-shift reallocation test.
struct TestInversion {
  double lower = 0.0;
  double upper = 0.0;
  double p_at_lower = 0.0;  // right-tail p at the returned lower endpoint
  double p_at_upper = 0.0;  // left-tail p at the returned upper endpoint
  double target = 0.0;      // one-sided size (1 - level) / 2
  int evaluations = 0;
  bool used_grid_scan = false;
};

struct InversionOptions {
  double resolution = 0.005;  // outcome units
  double bracket_ses = 4.0;   // initial half-width in sharp-null SEs
  int max_widenings = 2;
};

namespace detail {

/// Finds the boundary between rejected and accepted values of a on one side.
/// `p_of(a)` is the one-sided p-value; `direction` is -1 for the lower end.
template <class PValue>
double bisect_boundary(PValue&& p_of, double tau, double half_width, double target, int direction,
                       const InversionOptions& o, int& evals, bool& grid) {
  auto rejected = [&](double p) { return p <= target; };
  const double p_center = p_of(tau);
  ++evals;
  if (rejected(p_center))
    throw NumericalError("the observed estimate itself is rejected; the test cannot be inverted at this level");

  double outer = tau + direction * half_width;
  double p_outer = p_of(outer);
  ++evals;
  for (int w = 0; !rejected(p_outer); ++w) {
    if (w == o.max_widenings)
      throw NumericalError("inversion bracket failed: p-value does not cross the target within the bracket");
    half_width *= 2.0;
    outer = tau + direction * half_width;
    p_outer = p_of(outer);
    ++evals;
  }

  // p must fall monotonically moving outward from tau
  double inner = tau, p_inner = p_center;
  bool monotone = true;
  while (std::abs(outer - inner) > o.resolution) {
    const double mid = 0.5 * (inner + outer);
    const double p_mid = p_of(mid);
    ++evals;
    if (p_mid > p_inner + 1e-12 || p_mid + 1e-12 < p_outer) {
      monotone = false;
      break;
    }
    if (rejected(p_mid)) {
      outer = mid;
      p_outer = p_mid;
    } else {
      inner = mid;
      p_inner = p_mid;
    }
  }
  if (monotone) return 0.5 * (inner + outer);

  // fall back to scanning the remaining bracket from the inside out
  grid = true;
  const double step = o.resolution * direction;
  double last_accepted = inner;
  for (double a = inner + step; (a - outer) * direction < 0.0; a += step) {
    ++evals;
    if (rejected(p_of(a))) return 0.5 * (last_accepted + a);
    last_accepted = a;
  }
  return 0.5 * (last_accepted + outer);
}

}  // namespace detail

/// Interval of additive effects a not rejected by one-sided reallocation
/// tests at size (1 - level) / 2 on each side. Every candidate a reuses one
/// derived seed, so p(a) is a monotone step function and bisection is stable.
inline TestInversion invert_reallocation_test(const TwoGroupSample& sample, double level, std::size_t replicates,
                                              std::uint64_t seed, ExecutionOptions opts = {},
                                              InversionOptions o = {}) {
  detail::require_level(level);
  const double tau = diff_in_means(sample);
  const double se_sharp = std::sqrt(theory::var_sharp_reallocate(grand_variance(sample), sample.n1(), sample.n0()));
  const std::uint64_t candidate_seed = derive_seed(seed, 0x1a7e5u);

  TestInversion out;
  out.target = (1.0 - level) / 2.0;
  if (se_sharp == 0.0) {
    out.lower = out.upper = tau;
    out.p_at_lower = out.p_at_upper = 1.0;
    return out;
  }

  auto p_right = [&](double a) {
    return p_value(reallocate_mc(sample, a, replicates, candidate_seed, opts), tau, Tail::right).p;
  };
  auto p_left = [&](double a) {
    return p_value(reallocate_mc(sample, a, replicates, candidate_seed, opts), tau, Tail::left).p;
  };

  const double half = o.bracket_ses * se_sharp;
  out.lower = detail::bisect_boundary(p_right, tau, half, out.target, -1, o, out.evaluations, out.used_grid_scan);
  out.upper = detail::bisect_boundary(p_left, tau, half, out.target, +1, o, out.evaluations, out.used_grid_scan);
  out.p_at_lower = p_right(out.lower);
  out.p_at_upper = p_left(out.upper);
  out.evaluations += 2;
  return out;
}

inline InferenceReport ci_invert_reallocation(const TwoGroupSample& sample, double level, std::size_t replicates,
                                              std::uint64_t seed, ExecutionOptions opts = {}) {
  const auto inv = invert_reallocation_test(sample, level, replicates, seed, opts);
  InferenceReport r;
  r.kind = ReportKind::interval;
  r.lower = inv.lower;
  r.upper = inv.upper;
  r.tail = Tail::two_sided;
  r.level = level;
  r.method = "invert-reallocation";
  r.replicates = replicates;
  r.seed = seed;
  r.estimate = diff_in_means(sample);
  return r;
}

}  // namespace siminfer
