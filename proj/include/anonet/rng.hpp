#pragma once

#include <cstdint>
#include <random>

namespace anonet {

/// Experiments draw from mt19937_64 (fully specified by the C++ standard)
/// and map to ranges by rejection sampling, so the same seed gives the same
/// numbers on every standard library.
inline constexpr const char* kRngName = "mt19937_64+rejection";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace anonet
