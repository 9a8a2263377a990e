#include <doctest.h>

#include <cmath>
#include <vector>

#include "fadelab/errors.hpp"
#include "fadelab/rng.hpp"
#include "fadelab/source.hpp"

using namespace fadelab;
using Pnd = PhotonNumberDistribution;

namespace {

double total_mass(const Pnd& p) {
    double s = 0.0;
    for (double v : p.probabilities()) s += v;
    return s;
}

} // namespace

TEST_CASE("coherent state photon statistics") {
    SUBCASE("zero mean is vacuum") {
        const Pnd v = Pnd::coherent(0.0);
        CHECK(v.p(0) == 1.0);
        CHECK(v.tail_bound() == 0.0);
    }
    SUBCASE("p0 of mean 1 is 1/e") {
        const Pnd c = Pnd::coherent(1.0);
        CHECK(c.p(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    }
    SUBCASE("tail bound is certified") {
        const Pnd c = Pnd::coherent(2.0);
        CHECK(c.tail_bound() <= 1e-10);
        CHECK(total_mass(c) >= 1.0 - 1e-10);
        CHECK(total_mass(c) <= 1.0 + 1e-12);
    }
    SUBCASE("explicit nmax too small throws") {
        CHECK_THROWS_AS(Pnd::coherent(5.0, 3), TruncationError);
    }
    SUBCASE("matches a 1e7-sample Poisson Monte Carlo within 5 sigma per bin") {
        const Pnd c = Pnd::coherent(2.0);
        const std::int64_t reps = 10000000;
        std::vector<std::int64_t> hist(64, 0);
        Rng rng(4242);
        for (std::int64_t i = 0; i < reps; ++i) {
            const std::int64_t k = sample_poisson(rng, 2.0);
            if (k < 64) ++hist[static_cast<std::size_t>(k)];
        }
        for (int n = 0; n <= 12; ++n) {
            const double expect = c.p(n) * static_cast<double>(reps);
            const double se = std::sqrt(expect * (1.0 - c.p(n)));
            CHECK(std::fabs(static_cast<double>(hist[static_cast<std::size_t>(n)]) - expect) <
                  5.0 * se + 1.0);
        }
    }
}

TEST_CASE("squeezed vacuum photon statistics") {
    SUBCASE("r = 0 is vacuum") {
        const Pnd v = Pnd::squeezed_vacuum(0.0);
        CHECK(v.p(0) == 1.0);
    }
    SUBCASE("odd probabilities are exactly zero") {
        const Pnd s = Pnd::squeezed_vacuum(1.3);
        for (int n = 1; n <= s.nmax(); n += 2) CHECK(s.p(n) == 0.0);
        for (int n = 0; n <= std::min(s.nmax(), 20); n += 2) CHECK(s.p(n) > 0.0);
    }
    SUBCASE("closed-form terms") {
        const Pnd s = Pnd::squeezed_vacuum(0.8);
        const double t = std::tanh(0.8);
        CHECK(s.p(0) == doctest::Approx(1.0 / std::cosh(0.8)).epsilon(1e-14));
        CHECK(s.p(2) == doctest::Approx(t * t / (2.0 * std::cosh(0.8))).epsilon(1e-14));
        CHECK(s.p(4) ==
              doctest::Approx(3.0 * t * t * t * t / (8.0 * std::cosh(0.8))).epsilon(1e-14));
    }
    SUBCASE("mean photon number is sinh^2 r") {
        const Pnd s = Pnd::squeezed_vacuum(1.0);
        const double expect = std::sinh(1.0) * std::sinh(1.0); // 1.3810978455418157
        // the certified 1e-10 tail costs up to ~nmax*tail in the mean
        CHECK(s.mean_photon_number() == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("multimode squeezed statistics") {
    SUBCASE("one mode reduces to the single-mode law") {
        const std::vector<double> rs{0.7};
        const Pnd multi = Pnd::multimode_squeezed(rs);
        const Pnd single = Pnd::squeezed_vacuum(0.7);
        for (int n = 0; n <= std::min(multi.nmax(), single.nmax()); ++n)
            CHECK(multi.p(n) == doctest::Approx(single.p(n)).epsilon(1e-13));
    }
    SUBCASE("a vacuum mode is the convolution identity") {
        const std::vector<double> rs{0.7, 0.0};
        const Pnd multi = Pnd::multimode_squeezed(rs);
        const Pnd single = Pnd::squeezed_vacuum(0.7);
        for (int n = 0; n <= single.nmax(); ++n)
            CHECK(multi.p(n) == doctest::Approx(single.p(n)).epsilon(1e-13));
    }
    SUBCASE("two equal modes keep even-only support and add means") {
        const std::vector<double> rs{0.6, 0.6};
        const Pnd multi = Pnd::multimode_squeezed(rs);
        for (int n = 1; n <= multi.nmax(); n += 2) CHECK(multi.p(n) == 0.0);
        const double expect = 2.0 * std::sinh(0.6) * std::sinh(0.6);
        CHECK(multi.mean_photon_number() == doctest::Approx(expect).epsilon(1e-7));
    }
    SUBCASE("empty mode list throws") {
        CHECK_THROWS_AS(Pnd::multimode_squeezed({}), EmptyInputError);
    }
}

TEST_CASE("thermal photon statistics") {
    CHECK(Pnd::thermal(0.0).p(0) == 1.0);
    const Pnd t = Pnd::thermal(1.0);
    CHECK(t.p(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.mean_photon_number() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("fock and emitter-array statistics") {
    const Pnd f = Pnd::fock(3);
    CHECK(f.nmax() == 3);
    CHECK(f.p(3) == 1.0);
    CHECK(f.tail_bound() == 0.0);

    const Pnd e = Pnd::emitter_array(10, 0.3);
    CHECK(e.nmax() == 10);
    CHECK(total_mass(e) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(e.mean_photon_number() == doctest::Approx(3.0).epsilon(1e-12));
    // sub-Poissonian: variance n p (1-p) < mean
    double m2 = 0.0;
    for (int n = 0; n <= 10; ++n) m2 += e.p(n) * n * n;
    CHECK(m2 - 9.0 == doctest::Approx(10.0 * 0.3 * 0.7).epsilon(1e-11));
    CHECK(Pnd::emitter_array(5, 1.0).p(5) == 1.0);
}

TEST_CASE("binomial loss channel") {
    SUBCASE("eta = 1 is the identity") {
        const Pnd s = Pnd::squeezed_vacuum(0.9);
        const Pnd out = apply_loss(s, 1.0);
        for (int n = 0; n <= s.nmax(); ++n) CHECK(out.p(n) == s.p(n));
    }
    SUBCASE("eta = 0 maps everything to vacuum") {
        const Pnd out = apply_loss(Pnd::coherent(3.0), 0.0);
        CHECK(out.p(0) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("single photon under 22% loss is a Bernoulli") {
        const Pnd out = apply_loss(Pnd::fock(1), 0.22);
        CHECK(out.p(0) == doctest::Approx(0.78).epsilon(1e-14));
        CHECK(out.p(1) == doctest::Approx(0.22).epsilon(1e-14));
    }
    SUBCASE("eta outside [0,1] throws") {
        CHECK_THROWS_AS(apply_loss(Pnd::fock(1), -0.2), DomainError);
        CHECK_THROWS_AS(apply_loss(Pnd::fock(1), 1.2), DomainError);
    }
    SUBCASE("coherent stays coherent with scaled mean") {
        const Pnd out = apply_loss(Pnd::coherent(2.5), 0.4);
        const Pnd ref = Pnd::coherent(1.0);
        for (int n = 0; n <= 15; ++n) CHECK(std::fabs(out.p(n) - ref.p(n)) < 1e-10);
    }
}

TEST_CASE("loss composition: eta1 then eta2 equals eta1*eta2") {
    for (const Pnd& state : {Pnd::squeezed_vacuum(1.0), Pnd::coherent(2.0), Pnd::thermal(1.5),
                             Pnd::emitter_array(12, 0.8)}) {
        const Pnd two_step = apply_loss(apply_loss(state, 0.7), 0.5);
        const Pnd one_step = apply_loss(state, 0.35);
        REQUIRE(two_step.nmax() == one_step.nmax());
        for (int n = 0; n <= one_step.nmax(); ++n)
            CHECK(std::fabs(two_step.p(n) - one_step.p(n)) < 1e-12);
    }
}

TEST_CASE("loss scales the mean photon number by eta") {
    for (double eta : {0.9, 0.5, 0.22, 0.03}) {
        const Pnd s = Pnd::multimode_squeezed(std::vector<double>{0.8, 0.5});
        const Pnd out = apply_loss(s, eta);
        CHECK(std::fabs(out.mean_photon_number() - eta * s.mean_photon_number()) < 1e-10);
    }
}

TEST_CASE("stress: loss on a large squeezed state stays normalized and stable") {
    const Pnd bright = Pnd::squeezed_vacuum(2.3); // nmax ~ 1400
    CHECK(bright.nmax() > 500);
    const Pnd out = apply_loss(bright, 0.37);
    CHECK(total_mass(out) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : out.probabilities()) CHECK(v >= 0.0);
    CHECK(std::fabs(out.mean_photon_number() - 0.37 * bright.mean_photon_number()) < 1e-7);
}

TEST_CASE("convolution adds means") {
    const Pnd a = Pnd::emitter_array(6, 0.5);
    const Pnd b = Pnd::thermal(0.7);
    const Pnd c = convolve(a, b);
    CHECK(c.mean_photon_number() ==
          doctest::Approx(a.mean_photon_number() + b.mean_photon_number()).epsilon(1e-9));
}
