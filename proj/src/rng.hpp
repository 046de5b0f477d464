#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace canopy {

// splitmix64 finalizer; the workhorse behind Rng and seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Derives a sub-stream seed from a base seed and a tag path. Streams keyed
// this way are independent of draw order, so adding a plant or organ never
// shifts the randomness consumed by existing ones.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

// Deterministic seedable generator (splitmix64 sequence). Same seed gives
// the same draws on every platform; normal() uses Box-Muller so the output
// does not depend on any library distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    double normal(double mean, double stddev);
    // Index drawn proportionally to weights (need not be normalized).
    std::size_t categorical(const std::vector<double>& weights);

private:
    std::uint64_t state_;
};

}  // namespace canopy
