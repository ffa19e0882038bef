#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "siminfer/errors.hpp"
#include "siminfer/sample.hpp"

namespace siminfer {

namespace detail {

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sum of squared deviations from the sample's own mean.
inline double sum_sq_dev(std::span<const double> xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss;
}

}  // namespace detail

/// Observed difference in group means, treated minus control.
inline double diff_in_means(const TwoGroupSample& sample) {
  return detail::mean_of(sample.group(1)) - detail::mean_of(sample.group(0));
}

inline double group_mean(const TwoGroupSample& sample, int w) { return detail::mean_of(sample.group(w)); }

/// s^2: deviations from the single grand mean, divisor n - 1.
inline double grand_variance(const TwoGroupSample& sample) {
  return detail::sum_sq_dev(sample.outcomes()) / static_cast<double>(sample.n() - 1);
}

/// s_w^2: deviations from the group-w mean, divisor n_w - 1.
inline double group_variance(const TwoGroupSample& sample, int w) {
  const auto g = sample.group(w);
  return detail::sum_sq_dev(g) / static_cast<double>(g.size() - 1);
}

/// Central moment sums for a block of draws. Blocks merge exactly (up to
/// round-off) so chunked reductions can be combined in a fixed order.
class MomentAccumulator {
 public:
  void push(double x) {
    const double n1 = static_cast<double>(count_);
    ++count_;
    const double n = static_cast<double>(count_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
    m2_ += term1;
  }

  /// Pebay's pairwise update.
  void merge(const MomentAccumulator& b) {
    if (b.count_ == 0) return;
    if (count_ == 0) {
      *this = b;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(b.count_);
    const double n = na + nb;
    const double d = b.mean_ - mean_;
    const double d2 = d * d;
    const double d3 = d * d2;
    const double d4 = d2 * d2;

    const double m2 = m2_ + b.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + b.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * b.m2_ - nb * m2_) / n;
    const double m4 = m4_ + b.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * b.m2_ + nb * nb * m2_) / (n * n) + 4.0 * d * (na * b.m3_ - nb * m3_) / n;
    mean_ = (na * mean_ + nb * b.mean_) / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    count_ += b.count_;
  }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  /// Population-style central moments (divisor = count).
  double central2() const noexcept { return m2_ / static_cast<double>(count_); }
  double central3() const noexcept { return m3_ / static_cast<double>(count_); }
  double central4() const noexcept { return m4_ / static_cast<double>(count_); }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

/// Moment summary of a simulated distribution. `seed` is empty when the draws
/// come from exact enumeration.
struct DistributionSummary {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double skewness = std::numeric_limits<double>::quiet_NaN();
  double excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
  bool higher_moments_defined = false;
  std::uint64_t replicate_count = 0;
  std::string method_tag;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const DistributionSummary& a, const DistributionSummary& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return same(a.mean, b.mean) && same(a.variance, b.variance) && same(a.std_error, b.std_error) &&
           same(a.skewness, b.skewness) && same(a.excess_kurtosis, b.excess_kurtosis) &&
           a.higher_moments_defined == b.higher_moments_defined && a.replicate_count == b.replicate_count &&
           a.method_tag == b.method_tag && a.seed == b.seed;
  }
};

/// Two-pass moments of `draws`: the mean over fixed-size blocks merged in
/// index order, then central sums around that mean.
inline DistributionSummary summarize(std::span<const double> draws, std::string method_tag,
                                     std::optional<std::uint64_t> seed) {
  if (draws.size() < 2) throw ValidationError("summarize needs at least 2 draws");
  constexpr std::size_t kBlock = 1 << 16;
  const double count = static_cast<double>(draws.size());

  double total = 0.0;
  for (std::size_t start = 0; start < draws.size(); start += kBlock) {
    const std::size_t stop = std::min(draws.size(), start + kBlock);
    double partial = 0.0;
    for (std::size_t i = start; i < stop; ++i) partial += draws[i];
    total += partial;
  }
  const double mean = total / count;

  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::size_t start = 0; start < draws.size(); start += kBlock) {
    const std::size_t stop = std::min(draws.size(), start + kBlock);
    double p2 = 0.0, p3 = 0.0, p4 = 0.0;
    for (std::size_t i = start; i < stop; ++i) {
      const double d = draws[i] - mean;
      const double d2 = d * d;
      p2 += d2;
      p3 += d2 * d;
      p4 += d2 * d2;
    }
    s2 += p2;
    s3 += p3;
    s4 += p4;
  }

  DistributionSummary out;
  out.mean = mean;
  out.variance = s2 / count;
  out.std_error = std::sqrt(out.variance);
  out.replicate_count = draws.size();
  out.method_tag = std::move(method_tag);
  out.seed = seed;
  // treat spread at round-off level as zero
  const double scale = std::max(1.0, std::abs(mean));
  if (out.std_error > 1e-12 * scale) {
    const double m3 = s3 / count;
    const double m4 = s4 / count;
    out.skewness = m3 / (out.variance * out.std_error);
    out.excess_kurtosis = m4 / (out.variance * out.variance) - 3.0;
    out.higher_moments_defined = true;
  }
  return out;
}

}  // namespace siminfer
