#ifndef MLTSPEC_RNG_HPP
#define MLTSPEC_RNG_HPP

#include <cstdint>
#include <random>

#include "mltspec/common.hpp"

namespace mltspec {

/// splitmix64 step; used to derive independent seeds from (seed, tags).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic stream derivation: each (seed, tag...) pair owns its own
/// generator, so parallel trials never share RNG state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t s = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    s = splitmix64(s ^ d);
    return s;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return unif_(engine_); }
    double normal() { return norm_(engine_); }

    /// Standard circular complex normal: (x + jy)/sqrt(2), unit variance.
    cxd complex_normal() {
        double x = norm_(engine_);
        double y = norm_(engine_);
        return cxd(x, y) / std::sqrt(2.0);
    }

    /// Uniform integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(engine_)); }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace mltspec

#endif  // MLTSPEC_RNG_HPP
