#pragma once

#include <cstdint>

namespace trialmarket {

/// Counter-based generator: draw `counter` of stream `key` is a pure function
/// of (key, counter), so any schedule of replications yields the same values.
/// The mixing function is the SplitMix64 finaliser.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Stream key for one replication of one policy.
  static constexpr std::uint64_t derive_key(std::uint64_t base_seed, std::uint64_t policy,
                                            std::uint64_t replication) noexcept {
    return mix(mix(mix(base_seed) ^ (policy + 0x632be59bd9b4e019ULL)) ^
               (replication + 0x85157af5ULL));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ ^ mix(counter));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

/// Sequential view over a CounterRng, for code that just wants the next draw.
class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t key) noexcept : rng_(key) {}
  constexpr double uniform() noexcept { return rng_.uniform(counter_++); }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace trialmarket
