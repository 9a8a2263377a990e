#include "fadelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fadelab/errors.hpp"

namespace fadelab {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
    return next_double() < p;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    // Lemire-style rejection to remove modulo bias.
    if (n == 0) throw DomainError("next_below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = root ^ 0xa5a5a5a5a5a5a5a5ULL;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t tag : tags) {
        state ^= tag + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
        out = splitmix64(state);
    }
    return out;
}

namespace {

// Inversion by sequential CDF walk; expected cost O(n p).
std::int64_t binomial_inversion(Rng& rng, std::int64_t n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    double f = std::pow(q, static_cast<double>(n)); // pmf(0), no underflow for n*p small
    double cdf = f;
    const double u = rng.next_double();
    std::int64_t k = 0;
    while (cdf < u && k < n) {
        ++k;
        f *= s * static_cast<double>(n - k + 1) / static_cast<double>(k);
        cdf += f;
    }
    return k;
}

// BTRS transformed-rejection sampler (Hoermann 1993), exact for n*p >= 10.
std::int64_t binomial_btrs(Rng& rng, std::int64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double q = 1.0 - p;
    const double spq = std::sqrt(nd * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const std::int64_t m = static_cast<std::int64_t>(std::floor((nd + 1.0) * p));
    const double h = std::lgamma(static_cast<double>(m) + 1.0) +
                     std::lgamma(nd - static_cast<double>(m) + 1.0);

    for (;;) {
        double u = rng.next_double() - 0.5;
        double v = rng.next_double();
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        const std::int64_t k = static_cast<std::int64_t>(kd);
        if (us >= 0.07 && v <= v_r) return k;
        v = std::log(v * alpha / (a / (us * us) + b));
        const double lhs = h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                           (kd - static_cast<double>(m)) * lpq;
        if (v <= lhs) return k;
    }
}

} // namespace

std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p) {
    if (n < 0 || p < 0.0 || p > 1.0 || !std::isfinite(p))
        throw DomainError("sample_binomial: need n >= 0 and p in [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    const bool flipped = p > 0.5;
    const double pp = flipped ? 1.0 - p : p;
    std::int64_t k;
    if (static_cast<double>(n) * pp < 10.0)
        k = binomial_inversion(rng, n, pp);
    else
        k = binomial_btrs(rng, n, pp);
    return flipped ? n - k : k;
}

void sample_multinomial(Rng& rng, std::int64_t n, std::span<const double> probs,
                        std::span<std::int64_t> counts) {
    if (probs.size() != counts.size())
        throw DomainError("sample_multinomial: size mismatch");
    double remaining_p = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p))
            throw DomainError("sample_multinomial: negative or non-finite probability");
        remaining_p += p;
    }
    if (remaining_p <= 0.0) throw DomainError("sample_multinomial: zero total probability");
    std::int64_t remaining = n;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (remaining == 0) {
            counts[i] = 0;
            continue;
        }
        const double cond = std::clamp(probs[i] / remaining_p, 0.0, 1.0);
        const std::int64_t c = sample_binomial(rng, remaining, cond);
        counts[i] = c;
        remaining -= c;
        remaining_p -= probs[i];
        if (remaining_p < 0.0) remaining_p = 0.0;
    }
    counts[counts.size() - 1] = remaining;
}

std::int64_t sample_poisson(Rng& rng, double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw DomainError("sample_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        // Knuth multiplication method.
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = rng.next_double();
        while (prod > limit) {
            ++k;
            prod *= rng.next_double();
        }
        return k;
    }
    // Sum of independent Poisson halves is Poisson; recurse into the
    // multiplication-method base case. Cost O(mean), fine for oracle use.
    const std::int64_t a = sample_poisson(rng, mean / 2.0);
    const std::int64_t b = sample_poisson(rng, mean - mean / 2.0);
    return a + b;
}

CategoricalSampler::CategoricalSampler(std::span<const double> probs) {
    cdf_.reserve(probs.size());
    double acc = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p))
            throw DomainError("CategoricalSampler: negative or non-finite probability");
        acc += p;
        cdf_.push_back(acc);
    }
    if (cdf_.empty() || acc <= 0.0)
        throw DomainError("CategoricalSampler: empty or zero-mass distribution");
    for (auto& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
}

std::size_t CategoricalSampler::sample(Rng& rng) const {
    const double u = rng.next_double();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(std::distance(cdf_.begin(), it));
}

} // namespace fadelab
