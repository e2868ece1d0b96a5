#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mangen {

/// Seeded generator with distribution code written out by hand, so sequences
/// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    /// Standard normal via Box-Muller (one value per call; the pair partner is cached).
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Per-stage seed: the stage name's hash mixed into the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);
/// Per-index seed for parallel trials, independent of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace mangen
