#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace surgenet {

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seeded generator with a platform-independent output stream.
///
/// The raw stream is std::mt19937_64, whose output is fixed by the standard.
/// Every derived draw (uniform reals, bounded integers, normals) is computed
/// here rather than through <random> distributions, whose algorithms vary
/// between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller (one draw per two uniforms, no caching).
    double normal();

    /// Independent generator for slot `index`; seed = mix(seed, index).
    Rng child(std::uint64_t index) const;

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Draw from Normal(mean, std). std == 0 returns mean exactly.
double normal_sample(Rng& rng, double mean, double std);

}  // namespace surgenet
