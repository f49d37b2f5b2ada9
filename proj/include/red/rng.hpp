#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace red {

/// Counter-based generator: every draw is a pure hash of
/// (seed, stream, counter), so results never depend on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
      : key_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) ^ mix(stream + 0x9e3779b97f4a7c15ULL) ^
                 mix(substream * 0xd1b54a32d192ed03ULL + 0x3c6ef372fe94f82bULL))) {}

  std::uint64_t next_u64() { return mix(key_ ^ mix(++counter_ * 0x9e3779b97f4a7c15ULL)); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }

  std::uint64_t counter() const { return counter_; }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace red
