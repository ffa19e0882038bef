#pragma once

#include <cstdint>
#include <limits>

namespace siminfer::detail {
__extension__ using uint128 = unsigned __int128;
}

namespace siminfer {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent seed for a named sub-task from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix64(seed ^ mix64(salt + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based generator: output k of stream (seed, stream) is a pure
/// function of (seed, stream, k). Each replicate owns one stream, so results
/// do not depend on how replicates are scheduled across workers.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  constexpr StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : state_(mix64(seed + mix64(stream ^ 0xd1b54a32d192ed03ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept {
    detail::uint128 m = static_cast<detail::uint128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<detail::uint128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace siminfer
