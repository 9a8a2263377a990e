#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "fadelab/errors.hpp"
#include "fadelab/rng.hpp"

using namespace fadelab;

TEST_CASE("same seed gives the same stream") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived seeds differ per tag path") {
    const std::uint64_t root = 99;
    CHECK(derive_seed(root, {1}) != derive_seed(root, {2}));
    CHECK(derive_seed(root, {1, 2}) != derive_seed(root, {2, 1}));
    CHECK(derive_seed(root, {1}) == derive_seed(root, {1}));
}

TEST_CASE("uniform doubles lie in [0,1) with sensible mean") {
    Rng rng(7);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::fabs(sum / n - 0.5) < 0.005);
}

TEST_CASE("binomial sampler matches mean and variance in both regimes") {
    // small n*p goes through inversion, large through BTRS
    struct Case {
        std::int64_t n;
        double p;
    };
    for (const Case c : {Case{40, 0.05}, Case{1000, 0.3}, Case{100000000, 0.2}}) {
        Rng rng(2024);
        const int reps = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < reps; ++i) {
            const double k = static_cast<double>(sample_binomial(rng, c.n, c.p));
            REQUIRE(k >= 0);
            REQUIRE(k <= static_cast<double>(c.n));
            sum += k;
            sum2 += k * k;
        }
        const double mean = sum / reps;
        const double var = sum2 / reps - mean * mean;
        const double true_mean = static_cast<double>(c.n) * c.p;
        const double true_var = true_mean * (1.0 - c.p);
        const double se_mean = std::sqrt(true_var / reps);
        CHECK(std::fabs(mean - true_mean) < 5.0 * se_mean);
        CHECK(std::fabs(var - true_var) < 0.05 * true_var);
    }
}

TEST_CASE("binomial edge cases") {
    Rng rng(5);
    CHECK(sample_binomial(rng, 100, 0.0) == 0);
    CHECK(sample_binomial(rng, 100, 1.0) == 100);
    CHECK(sample_binomial(rng, 0, 0.5) == 0);
    CHECK_THROWS_AS(sample_binomial(rng, -1, 0.5), DomainError);
    CHECK_THROWS_AS(sample_binomial(rng, 10, 1.5), DomainError);
}

TEST_CASE("multinomial counts always sum to the trial number") {
    Rng rng(11);
    const std::vector<double> p{0.1, 0.0, 0.4, 0.25, 0.25};
    std::vector<std::int64_t> counts(p.size());
    for (int rep = 0; rep < 200; ++rep) {
        sample_multinomial(rng, 1000, p, counts);
        std::int64_t total = 0;
        for (std::int64_t c : counts) total += c;
        CHECK(total == 1000);
        CHECK(counts[1] == 0); // zero-probability bin never fires
    }
}

TEST_CASE("poisson sampler matches mean and variance") {
    Rng rng(3);
    for (const double mean : {0.5, 4.0, 60.0}) {
        const int reps = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < reps; ++i) {
            const double k = static_cast<double>(sample_poisson(rng, mean));
            sum += k;
            sum2 += k * k;
        }
        const double m = sum / reps;
        const double v = sum2 / reps - m * m;
        CHECK(std::fabs(m - mean) < 5.0 * std::sqrt(mean / reps));
        CHECK(std::fabs(v - mean) < 0.08 * mean + 0.05);
    }
}

TEST_CASE("categorical sampler hits only supported indices") {
    const std::vector<double> p{0.0, 0.5, 0.0, 0.5};
    CategoricalSampler cat(p);
    Rng rng(17);
    for (int i = 0; i < 10000; ++i) {
        const std::size_t k = cat.sample(rng);
        CHECK((k == 1 || k == 3));
    }
}
