#include "surgenet/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "surgenet/numerics.hpp"

namespace surgenet {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("Rng::below: empty range");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::child(std::uint64_t index) const {
    return Rng(mix64(seed_ ^ mix64(index)));
}

double normal_sample(Rng& rng, double mean, double std) {
    if (!(std >= 0.0)) {
        throw InvalidArgument("normal_sample: std must be >= 0, got " + std::to_string(std));
    }
    if (std == 0.0) return mean;
    return mean + std * rng.normal();
}

}  // namespace surgenet
