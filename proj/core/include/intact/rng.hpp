#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace intact {

// Deterministic splittable random stream (splitmix64 core). A stream is
// identified by its seed; child(tag) derives an independent stream without
// consuming state, so (module, step, dimension) sub-streams can be handed
// out reproducibly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(mix(seed ^ 0x8c95'4c1c'8a1e'b0d1ull)) {}

  RngStream child(std::uint64_t tag) const {
    return RngStream(mix(seed_ ^ mix(tag ^ 0x9e37'79b9'7f4a'7c15ull)));
  }

  RngStream child(std::string_view label) const { return child(fnv1a(label)); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9e37'79b9'7f4a'7c15ull;
    return mix(state_);
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Uniform integer in {0, ..., n-1}, rejection-sampled so every value has
  // identical mass.
  int uniform_int(int n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t bound = ~0ull - ~0ull % un;
    std::uint64_t x = next_u64();
    while (x >= bound) x = next_u64();
    return static_cast<int>(x % un);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58'476d'1ce4'e5b9ull;
    z ^= z >> 27;
    z *= 0x94d0'49bb'1331'11ebull;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf2'9ce4'8422'2325ull;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x1000'0000'01b3ull;
    }
    return h;
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace intact
