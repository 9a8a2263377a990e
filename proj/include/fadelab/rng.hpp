#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace fadelab {

// All randomness in the library flows through this generator so results are
// reproducible from a single root seed across platforms and thread counts.
//
// Core generator: xoshiro256** (Blackman & Vigna), state expanded from the
// seed with splitmix64. Independent streams for shards/replicates are made
// with derive_seed(root, tags...), which hashes the tag path through
// splitmix64; the stream layout is therefore a pure function of the root
// seed and the logical position of the consumer, never of thread scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform double in [0, 1) with 53 random bits.
    double next_double();

    bool bernoulli(double p);

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t s_[4];
};

// Deterministic seed derivation for parallel shards: mixes each tag into the
// parent seed through splitmix64 steps.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

// Exact binomial sampling. Inversion for small n*p, transformed rejection
// (BTRS) otherwise, so the cost is O(1) even for n ~ 1e10.
std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p);

// Multinomial via conditional binomials in fixed bin order.
// probs need not be normalized; counts.size() == probs.size().
void sample_multinomial(Rng& rng, std::int64_t n, std::span<const double> probs,
                        std::span<std::int64_t> counts);

// Poisson sampling (multiplication method for small mean, else via
// binomial splitting); used by Monte Carlo oracles.
std::int64_t sample_poisson(Rng& rng, double mean);

// Draws indices distributed according to a fixed probability vector by
// binary search on the cumulative table.
class CategoricalSampler {
public:
    explicit CategoricalSampler(std::span<const double> probs);

    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> cdf_;
};

} // namespace fadelab
