#pragma once

// Closed-form variances of the difference in means under each data
// collection mechanism and each simulation method.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "siminfer/csv.hpp"
#include "siminfer/errors.hpp"
#include "siminfer/moments.hpp"
#include "siminfer/sample.hpp"

namespace siminfer::theory {

namespace detail {

inline double inv_sum(std::size_t n1, std::size_t n0) {
  return 1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n0);
}

inline void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw ValidationError(std::string(what) + " must be non-negative");
}

inline void require_group_sizes(std::size_t n1, std::size_t n0, std::size_t minimum = 1) {
  if (n1 < minimum || n0 < minimum)
    throw ValidationError("group sizes must be at least " + std::to_string(minimum));
}

}  // namespace detail

/// Random allocation or reallocation under the sharp null: s^2 (1/n1 + 1/n0).
inline double var_sharp_reallocate(double s2, std::size_t n1, std::size_t n0) {
  detail::require_nonnegative(s2, "s2");
  detail::require_group_sizes(n1, n0);
  return s2 * detail::inv_sum(n1, n0);
}

/// Pooled bootstrap under the sharp null; the reallocation value times (n-1)/n.
inline double var_sharp_resample(double s2, std::size_t n1, std::size_t n0) {
  const double n = static_cast<double>(n1 + n0);
  return var_sharp_reallocate(s2, n1, n0) * (n - 1.0) / n;
}

/// Random sampling under the sharp null, given the population variance.
inline double var_sharp_random_sampling(double sigma2, std::size_t n1, std::size_t n0) {
  detail::require_nonnegative(sigma2, "sigma2");
  detail::require_group_sizes(n1, n0);
  return sigma2 * detail::inv_sum(n1, n0);
}

/// Common within-group variance s_a^2 of the table imputed under Y(1) = Y(0) + a.
inline double imputed_common_variance(double s2, double tau_hat, double a, std::size_t n1, std::size_t n0) {
  const double n = static_cast<double>(n1 + n0);
  const double k = static_cast<double>(n1) * static_cast<double>(n0) / (n * (n - 1.0));
  return s2 + k * a * (a - 2.0 * tau_hat);
}

/// Reallocation variance under H0: Y(1) = Y(0) + a.
inline double var_reallocate_additive(double s2, double tau_hat, double a, std::size_t n1, std::size_t n0) {
  detail::require_group_sizes(n1, n0);
  if (n1 + n0 < 3) throw ValidationError("need n >= 3");
  const double sa2 = imputed_common_variance(s2, tau_hat, a, n1, n0);
  if (sa2 < 0.0) {
    // round-off around a perfect fit is not an inconsistency
    if (sa2 > -1e-12 * std::max(1.0, s2)) return 0.0;
    throw NumericalError("imputed variance is negative; s2 and tau_hat are inconsistent");
  }
  return sa2 * detail::inv_sum(n1, n0);
}

/// Neyman variance under random allocation, including the unit-level effect term.
inline double var_estimation_random_allocation(double s1_star2, double s0_star2, double s10_star2, std::size_t n1,
                                               std::size_t n0) {
  detail::require_nonnegative(s1_star2, "s1*^2");
  detail::require_nonnegative(s0_star2, "s0*^2");
  detail::require_nonnegative(s10_star2, "s*(1-0)^2");
  detail::require_group_sizes(n1, n0);
  const double n = static_cast<double>(n1 + n0);
  const double v = s1_star2 / static_cast<double>(n1) + s0_star2 / static_cast<double>(n0) - s10_star2 / n;
  if (v < 0.0) {
    if (v > -1e-12 * std::max(1.0, s1_star2 + s0_star2)) return 0.0;
    throw NumericalError("random-allocation variance is negative; variance inputs are inconsistent");
  }
  return v;
}

inline double var_estimation_random_sampling(double sigma1_2, double sigma0_2, std::size_t n1, std::size_t n0) {
  detail::require_nonnegative(sigma1_2, "sigma1^2");
  detail::require_nonnegative(sigma0_2, "sigma0^2");
  detail::require_group_sizes(n1, n0);
  return sigma1_2 / static_cast<double>(n1) + sigma0_2 / static_cast<double>(n0);
}

/// Within-group bootstrap: each group's s_w^2/n_w shrunk by (n_w - 1)/n_w.
inline double var_estimation_resample(double s1_2, double s0_2, std::size_t n1, std::size_t n0) {
  detail::require_nonnegative(s1_2, "s1^2");
  detail::require_nonnegative(s0_2, "s0^2");
  detail::require_group_sizes(n1, n0, 2);
  const double m1 = static_cast<double>(n1);
  const double m0 = static_cast<double>(n0);
  return s1_2 / m1 * (m1 - 1.0) / m1 + s0_2 / m0 * (m0 - 1.0) / m0;
}

enum class DataMechanism { random_allocation, random_sampling, reallocate, resample_pooled, resample_within };

/// Testing the sharp null, testing an additive shift, or estimation.
struct Context {
  enum class Kind { sharp_null, additive, estimation };
  Kind kind = Kind::sharp_null;
  double a = 0.0;

  static Context sharp_null() { return {Kind::sharp_null, 0.0}; }
  static Context additive(double a) { return {Kind::additive, a}; }
  static Context estimation() { return {Kind::estimation, 0.0}; }
};

/// One cell of the variance summary table. Only combinations that have a
/// closed form can be constructed.
class VarianceScenario {
 public:
  VarianceScenario(DataMechanism mechanism, Context context) : mechanism_(mechanism), context_(context) {
    if (!supported(mechanism, context.kind))
      throw ValidationError("no closed-form variance for this mechanism/context combination");
  }

  static bool supported(DataMechanism m, Context::Kind k) {
    using K = Context::Kind;
    switch (m) {
      case DataMechanism::random_allocation:
      case DataMechanism::random_sampling:
        return k == K::sharp_null || k == K::estimation;
      case DataMechanism::reallocate:
        return k == K::sharp_null || k == K::additive;
      case DataMechanism::resample_pooled:
        return k == K::sharp_null;
      case DataMechanism::resample_within:
        return k == K::estimation;
    }
    return false;
  }

  DataMechanism mechanism() const noexcept { return mechanism_; }
  Context context() const noexcept { return context_; }

 private:
  DataMechanism mechanism_;
  Context context_;
};

/// Inputs for the dispatch surface. Which fields are required depends on the
/// scenario; a missing one raises ValidationError.
struct VarianceInputs {
  std::size_t n1 = 0;
  std::size_t n0 = 0;
  std::optional<double> s2;         // grand sample variance
  std::optional<double> s1_2;       // within-group sample variances
  std::optional<double> s0_2;
  std::optional<double> tau_hat;
  std::optional<double> s1_star2;   // potential-outcome variances, all units
  std::optional<double> s0_star2;
  std::optional<double> s10_star2;  // variance of unit-level effects
  std::optional<double> sigma2;     // population variances
  std::optional<double> sigma1_2;
  std::optional<double> sigma0_2;

  /// Everything computable from an observed sample.
  static VarianceInputs from_sample(const TwoGroupSample& sample) {
    VarianceInputs in;
    in.n1 = sample.n1();
    in.n0 = sample.n0();
    in.s2 = grand_variance(sample);
    in.s1_2 = group_variance(sample, 1);
    in.s0_2 = group_variance(sample, 0);
    in.tau_hat = diff_in_means(sample);
    return in;
  }
};

inline double variance(const VarianceScenario& scenario, const VarianceInputs& in) {
  auto need = [](const std::optional<double>& v, const char* name) {
    if (!v) throw ValidationError(std::string("scenario requires input '") + name + "'");
    return *v;
  };
  using K = Context::Kind;
  const auto ctx = scenario.context();
  switch (scenario.mechanism()) {
    case DataMechanism::random_allocation:
      if (ctx.kind == K::sharp_null) return var_sharp_reallocate(need(in.s2, "s2"), in.n1, in.n0);
      return var_estimation_random_allocation(need(in.s1_star2, "s1_star2"), need(in.s0_star2, "s0_star2"),
                                              need(in.s10_star2, "s10_star2"), in.n1, in.n0);
    case DataMechanism::random_sampling:
      if (ctx.kind == K::sharp_null) return var_sharp_random_sampling(need(in.sigma2, "sigma2"), in.n1, in.n0);
      return var_estimation_random_sampling(need(in.sigma1_2, "sigma1_2"), need(in.sigma0_2, "sigma0_2"), in.n1,
                                            in.n0);
    case DataMechanism::reallocate:
      if (ctx.kind == K::sharp_null) return var_sharp_reallocate(need(in.s2, "s2"), in.n1, in.n0);
      return var_reallocate_additive(need(in.s2, "s2"), need(in.tau_hat, "tau_hat"), ctx.a, in.n1, in.n0);
    case DataMechanism::resample_pooled:
      return var_sharp_resample(need(in.s2, "s2"), in.n1, in.n0);
    case DataMechanism::resample_within:
      return var_estimation_resample(need(in.s1_2, "s1_2"), need(in.s0_2, "s0_2"), in.n1, in.n0);
  }
  throw ValidationError("unknown scenario");
}

struct CurvePoint {
  double a = 0.0;
  double variance = 0.0;
};

/// Reallocation variance as a function of the hypothesized additive effect,
/// on an even grid of `steps` points from a_min to a_max inclusive.
inline std::vector<CurvePoint> variance_curve(const TwoGroupSample& sample, double a_min, double a_max,
                                              std::size_t steps) {
  if (steps < 3) throw ValidationError("variance curve needs at least 3 steps");
  if (!(a_min < a_max)) throw ValidationError("variance curve needs a_min < a_max");
  const double s2 = grand_variance(sample);
  const double tau = diff_in_means(sample);
  std::vector<CurvePoint> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double a = a_min + (a_max - a_min) * static_cast<double>(i) / static_cast<double>(steps - 1);
    out.push_back({a, var_reallocate_additive(s2, tau, a, sample.n1(), sample.n0())});
  }
  return out;
}

/// `a,variance` CSV with full round-trip precision.
inline std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::vector<csv::Row> rows{{"a", "variance"}};
  char buf[2][64];
  for (const auto& p : curve) {
    auto e0 = std::to_chars(buf[0], buf[0] + 64, p.a).ptr;
    auto e1 = std::to_chars(buf[1], buf[1] + 64, p.variance).ptr;
    rows.push_back({std::string(buf[0], e0), std::string(buf[1], e1)});
  }
  return csv::write(rows);
}

}  // namespace siminfer::theory
