#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace relprobe::data {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seedable, splittable random stream.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Substream seeds are derived as
///   splitmix64(seed ^ splitmix64(domain * 2^32 + key)).
/// Bounded integers use rejection sampling on the raw 64-bit output and
/// normals use Box-Muller, so results do not depend on the standard
/// library's distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent substream for (domain, key); does not advance this stream.
  Stream split(std::uint32_t domain, std::uint64_t key) const {
    const std::uint64_t tag = (static_cast<std::uint64_t>(domain) << 32) + key;
    return Stream(splitmix64(seed_ ^ splitmix64(tag)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate.
  double normal();

  /// Fisher-Yates shuffle drawing j = below(i + 1) for i = n-1 .. 1.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Substream domains; keys within a domain are family indices or counters.
enum StreamDomain : std::uint32_t {
  kDomainFamilyNames = 1,
  kDomainFirstNames = 2,
  kDomainAugment = 3,
  kDomainEdits = 4,
  kDomainLocality = 5,
  kDomainPlant = 6,
};

}  // namespace relprobe::data
