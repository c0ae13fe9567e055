#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

namespace aperture {

// Seed for every randomized operation. Identical Seed + identical inputs
// must give bit-identical outputs everywhere randomness is used, across
// platforms and reimplementations.
struct Seed {
    std::uint64_t value = 0;
};

// Advances a SplitMix64 state once and returns the raw 64-bit output.
// Fixed published constants; pure function of the state.
std::uint64_t splitmix64_next(std::uint64_t& state);

// One uniform draw in [0, 1): the high 53 bits of the SplitMix64 output
// scaled by 2^-53. Returns (value, advanced state).
std::pair<double, std::uint64_t> rng_next(std::uint64_t state);

// FNV-1a 64-bit hash. Used to derive per-node sub-seeds from stable node
// ids so edits to unrelated nodes never perturb another node's stream.
std::uint64_t fnv1a64(std::string_view s);

// Sub-seed for a named node: SplitMix64 output of (seed XOR fnv1a64(id)).
Seed derive_subseed(Seed seed, std::string_view node_id);

// Stateful convenience wrapper over the same stream.
class RngStream {
public:
    explicit RngStream(Seed seed) : state_(seed.value) {}

    double uniform();                       // [0, 1)
    double normal();                        // Box-Muller, consumes two uniforms
    double laplace(double scale);           // inverse CDF, consumes one uniform
    // Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
};

} // namespace aperture
