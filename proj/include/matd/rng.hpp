#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace matd {

/// SplitMix64 finalizer. Used to derive child seeds so that every stream in
/// the hierarchy (cell -> replication -> agent/delay) is a pure function of
/// the master seed and its path.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace seed_tag {
inline constexpr std::uint64_t agent = 0xA6E17;
inline constexpr std::uint64_t delay = 0xDE1A7;
inline constexpr std::uint64_t cell = 0xCE11;
inline constexpr std::uint64_t replication = 0x4E9;
inline constexpr std::uint64_t kernel = 0x6E4;
inline constexpr std::uint64_t reward = 0x4E7A;
inline constexpr std::uint64_t attempt = 0xA77;
}  // namespace seed_tag

/// One pseudo-random stream. Wraps std::mt19937_64 (whose output sequence is
/// pinned by the standard) with hand-rolled distributions so that draws are
/// bit-identical across platforms; std:: distributions are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi], inclusive. Rejection sampling, no modulo bias.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return lo + static_cast<int>(x % span);
  }

  /// Standard normal via the Marsaglia polar method (libm use limited to
  /// sqrt/log). Caches the spare deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace matd
