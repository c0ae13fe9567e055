#include "aperture/rng.hpp"

#include <cmath>
#include <limits>

namespace aperture {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::pair<double, std::uint64_t> rng_next(std::uint64_t state) {
    const std::uint64_t z = splitmix64_next(state);
    return {static_cast<double>(z >> 11) * 0x1.0p-53, state};
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Seed derive_subseed(Seed seed, std::string_view node_id) {
    std::uint64_t state = seed.value ^ fnv1a64(node_id);
    return Seed{splitmix64_next(state)};
}

double RngStream::uniform() {
    return static_cast<double>(splitmix64_next(state_) >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // cos branch of Box-Muller; 1-u keeps the log argument in (0, 1].
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
}

double RngStream::laplace(double scale) {
    // u uniform in (-0.5, 0.5]; x = -scale * sign(u) * ln(1 - 2|u|).
    const double u = 0.5 - uniform();
    const double sign = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
    // 1 - 2|u| hits 0 only at u = 0.5; clamp keeps the draw finite.
    const double t = std::max(1.0 - 2.0 * std::fabs(u),
                              std::numeric_limits<double>::min());
    return -scale * sign * std::log(t);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
}

} // namespace aperture
