#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fadelab/detector.hpp"
#include "fadelab/errors.hpp"
#include "fadelab/source.hpp"

using namespace fadelab;
using Pnd = PhotonNumberDistribution;

namespace {

const DetectorConfig kPaperDetector{8, 0.22, 0.0};

double choose(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Regularized lower incomplete gamma, for chi-square p-values (test oracle).
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 500; ++n) {
            term *= x / (a + n);
            sum += term;
            if (term < sum * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // continued fraction for Q, Lentz
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi_square_p_value(const ClickStatistics& observed, const ClickStatistics& expected) {
    double chi2 = 0.0;
    int dof = -1;
    for (int k = 0; k <= observed.n_bins(); ++k) {
        const double e =
            expected.probability(k) * static_cast<double>(observed.trials());
        if (e < 1e-9) continue;
        const double o = static_cast<double>(observed.counts()[static_cast<std::size_t>(k)]);
        chi2 += (o - e) * (o - e) / e;
        ++dof;
    }
    return 1.0 - gamma_p(dof / 2.0, chi2 / 2.0);
}

} // namespace

TEST_CASE("detector config validation") {
    CHECK_THROWS_AS((DetectorConfig{0, 0.5, 0.0}).validate(), ParameterError);
    CHECK_THROWS_AS((DetectorConfig{8, 1.5, 0.0}).validate(), ParameterError);
    CHECK_THROWS_AS((DetectorConfig{8, 0.5, -0.1}).validate(), ParameterError);
}

TEST_CASE("vacuum never clicks") {
    const ClickStatistics cs = click_statistics(Pnd::fock(0), kPaperDetector);
    CHECK(cs.probability(0) == 1.0);
    for (int k = 1; k <= 8; ++k) CHECK(cs.probability(k) == 0.0);
}

TEST_CASE("single photon clicks once with the detection efficiency") {
    const ClickStatistics cs = click_statistics(Pnd::fock(1), kPaperDetector);
    CHECK(cs.probability(0) == doctest::Approx(0.78).epsilon(1e-13));
    CHECK(cs.probability(1) == doctest::Approx(0.22).epsilon(1e-13));
    for (int k = 2; k <= 8; ++k) CHECK(std::fabs(cs.probability(k)) < 1e-15);
}

TEST_CASE("coherent input gives a binomial click distribution") {
    for (const double mean : {0.5, 2.0, 5.0}) {
        for (const double eff : {0.22, 1.0}) {
            const DetectorConfig cfg{8, eff, 0.0};
            const ClickStatistics cs = click_statistics(Pnd::coherent(mean), cfg);
            const double q = 1.0 - std::exp(-eff * mean / 8.0);
            for (int k = 0; k <= 8; ++k) {
                const double expect =
                    choose(8, k) * std::pow(q, k) * std::pow(1.0 - q, 8 - k);
                CHECK(cs.probability(k) == doctest::Approx(expect).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("dark clicks: vacuum with dark exposure follows the binomial in 1-e^-dark") {
    const DetectorConfig cfg{8, 0.22, 0.05};
    const ClickStatistics cs = click_statistics(Pnd::fock(0), cfg);
    const double q = 1.0 - std::exp(-0.05);
    for (int k = 0; k <= 8; ++k)
        CHECK(cs.probability(k) ==
              doctest::Approx(choose(8, k) * std::pow(q, k) * std::pow(1.0 - q, 8 - k))
                  .epsilon(1e-10));
}

TEST_CASE("moments from clicks") {
    const ClickStatistics cs = click_statistics(Pnd::squeezed_vacuum(1.0), kPaperDetector);
    SUBCASE("l = 0 gives 1") { CHECK(moments_from_clicks(cs, 0) == doctest::Approx(1.0).epsilon(1e-14)); }
    SUBCASE("all-no-click statistics give 1 for every order") {
        const ClickStatistics vac = click_statistics(Pnd::fock(0), kPaperDetector);
        for (int l = 0; l <= 8; ++l)
            CHECK(moments_from_clicks(vac, l) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("out-of-range order throws") {
        CHECK_THROWS_AS(moments_from_clicks(cs, 9), DomainError);
        CHECK_THROWS_AS(moments_from_clicks(cs, -1), DomainError);
    }
}

TEST_CASE("round trip: sampling-formula moments equal the analytic moments") {
    // identity between the click-statistics construction and the moment
    // extraction, across a set of states
    for (const Pnd& state : {Pnd::coherent(2.0), Pnd::squeezed_vacuum(1.0), Pnd::thermal(1.0),
                             Pnd::emitter_array(15, 0.6)}) {
        const MomentVector analytic = analytic_moments(state, kPaperDetector);
        const ClickStatistics cs = click_statistics(state, kPaperDetector);
        for (int l = 0; l <= 8; ++l)
            CHECK(std::fabs(moments_from_clicks(cs, l) - analytic[l]) < 1e-12);
    }
}

TEST_CASE("alternating-sum reconstruction of the statistics from moments") {
    const ClickStatistics cs = click_statistics(Pnd::emitter_array(20, 0.7), kPaperDetector);
    const MomentVector mv = moment_vector_from_clicks(cs);
    for (int k = 0; k <= 8; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) {
            const double term = choose(k, j) * mv[8 - k + j];
            acc += (j % 2 == 0) ? term : -term;
        }
        CHECK(std::fabs(choose(8, k) * acc - cs.probability(k)) < 1e-10);
    }
}

TEST_CASE("moment vector is nonincreasing and within [0,1]") {
    for (const Pnd& state :
         {Pnd::coherent(4.0), Pnd::squeezed_vacuum(1.6), Pnd::thermal(2.5), Pnd::fock(7)}) {
        const MomentVector mv = analytic_moments(state, kPaperDetector);
        CHECK(mv[0] == 1.0);
        for (int l = 1; l <= 8; ++l) {
            CHECK(mv[l] <= mv[l - 1] + 1e-14);
            CHECK(mv[l] >= 0.0);
            CHECK(mv[l] <= 1.0);
        }
    }
}

TEST_CASE("coherent states have multiplicative moments (rank-one structure)") {
    // deviation is bounded by the certified truncation tail
    const MomentVector mv = analytic_moments(Pnd::coherent(2.0), kPaperDetector);
    for (int l = 0; l <= 8; ++l) CHECK(std::fabs(mv[l] - std::pow(mv[1], l)) < 1e-9);
    const MomentVector tight =
        analytic_moments(Pnd::coherent(2.0, Pnd::kAutoNmax, 1e-14), kPaperDetector);
    for (int l = 0; l <= 8; ++l) CHECK(std::fabs(tight[l] - std::pow(tight[1], l)) < 1e-13);
}

TEST_CASE("loss/efficiency interchange") {
    // channel loss and detector inefficiency commute in the linear model
    const Pnd state = Pnd::multimode_squeezed(std::vector<double>{0.9, 0.4});
    for (double eta : {0.9, 0.5, 0.1}) {
        const ClickStatistics a =
            click_statistics(apply_loss(state, eta), DetectorConfig{8, 0.22, 0.0});
        const ClickStatistics b =
            click_statistics(state, DetectorConfig{8, 0.22 * eta, 0.0});
        for (int k = 0; k <= 8; ++k)
            CHECK(std::fabs(a.probability(k) - b.probability(k)) < 1e-12);
    }
}

TEST_CASE("mean clicks") {
    const ClickStatistics vac = click_statistics(Pnd::fock(0), kPaperDetector);
    CHECK(mean_clicks(vac) == 0.0);
    const ClickStatistics one = click_statistics(Pnd::fock(1), kPaperDetector);
    CHECK(mean_clicks(one) == doctest::Approx(0.22).epsilon(1e-13));
    // algebraic identity: mean = N (1 - <:m:>)
    for (const Pnd& state : {Pnd::coherent(2.7), Pnd::squeezed_vacuum(1.2)}) {
        const ClickStatistics cs = click_statistics(state, kPaperDetector);
        CHECK(std::fabs(mean_clicks(cs) - 8.0 * (1.0 - moments_from_clicks(cs, 1))) < 1e-12);
    }
}

TEST_CASE("sample_clicks") {
    const ClickStatistics cs = click_statistics(Pnd::coherent(2.0), kPaperDetector);
    SUBCASE("deterministic for a fixed seed") {
        const ClickStatistics a = sample_clicks(cs, 100000, 7);
        const ClickStatistics b = sample_clicks(cs, 100000, 7);
        for (int k = 0; k <= 8; ++k) CHECK(a.counts()[static_cast<std::size_t>(k)] == b.counts()[static_cast<std::size_t>(k)]);
        const ClickStatistics c = sample_clicks(cs, 100000, 8);
        bool any_diff = false;
        for (int k = 0; k <= 8; ++k)
            any_diff |= a.counts()[static_cast<std::size_t>(k)] != c.counts()[static_cast<std::size_t>(k)];
        CHECK(any_diff);
    }
    SUBCASE("point mass stays a point mass") {
        std::vector<double> p(9, 0.0);
        p[0] = 1.0;
        const ClickStatistics point(8, p);
        const ClickStatistics s = sample_clicks(point, 1234, 99);
        CHECK(s.counts()[0] == 1234);
    }
    SUBCASE("empirical frequencies converge at M = 1e6") {
        const std::int64_t m = 1000000;
        const ClickStatistics s = sample_clicks(cs, m, 31337);
        CHECK(s.trials() == m);
        for (int k = 0; k <= 8; ++k) {
            const double se = std::sqrt(cs.probability(k) * (1.0 - cs.probability(k)) /
                                        static_cast<double>(m));
            CHECK(std::fabs(s.probability(k) - cs.probability(k)) <= 5.0 * se + 1e-9);
        }
    }
    SUBCASE("zero trials throw") { CHECK_THROWS_AS(sample_clicks(cs, 0, 1), EmptyInputError); }
}

TEST_CASE("monte carlo oracle: trivial cases") {
    SUBCASE("vacuum gives zero clicks always") {
        const ClickStatistics mc = monte_carlo_clicks(Pnd::fock(0), kPaperDetector, 20000, 5);
        CHECK(mc.counts()[0] == 20000);
    }
    SUBCASE("single photon at unit efficiency gives exactly one click") {
        const DetectorConfig perfect{8, 1.0, 0.0};
        const ClickStatistics mc = monte_carlo_clicks(Pnd::fock(1), perfect, 20000, 5);
        CHECK(mc.counts()[1] == 20000);
    }
    SUBCASE("thread count does not change the counts") {
        const ClickStatistics a =
            monte_carlo_clicks(Pnd::coherent(2.0), kPaperDetector, 50000, 12, 1);
        const ClickStatistics b =
            monte_carlo_clicks(Pnd::coherent(2.0), kPaperDetector, 50000, 12, 4);
        for (int k = 0; k <= 8; ++k)
            CHECK(a.counts()[static_cast<std::size_t>(k)] == b.counts()[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("monte carlo oracle agrees with the closed-form statistics") {
    // chi-square goodness of fit at the 0.1% level, M = 1e6 per state
    const std::int64_t m = 1000000;
    int idx = 0;
    for (const Pnd& state : {Pnd::coherent(2.0), Pnd::squeezed_vacuum(1.0), Pnd::fock(1)}) {
        const ClickStatistics expected = click_statistics(state, kPaperDetector);
        const ClickStatistics mc =
            monte_carlo_clicks(state, kPaperDetector, m, 1000 + idx++, 2);
        CHECK(chi_square_p_value(mc, expected) > 0.001);
    }
}

TEST_CASE("monte carlo with dark clicks agrees with the closed form") {
    const DetectorConfig cfg{8, 0.22, 0.03};
    const ClickStatistics expected = click_statistics(Pnd::coherent(1.5), cfg);
    const ClickStatistics mc = monte_carlo_clicks(Pnd::coherent(1.5), cfg, 1000000, 77, 2);
    CHECK(chi_square_p_value(mc, expected) > 0.001);
}

TEST_CASE("clicks CSV round trip with metadata") {
    const ClickStatistics cs =
        sample_clicks(click_statistics(Pnd::coherent(2.0), kPaperDetector), 5000, 3);
    ClickCsvMetadata meta;
    meta.n_bins = 8;
    meta.trials = 5000;
    meta.grid_index = 37;
    meta.grid_n = 100;
    meta.eta = 0.37;
    std::ostringstream out;
    write_clicks_csv(cs, meta, out);
    std::istringstream in(out.str());
    const auto [back, back_meta] = read_clicks_csv(in, "<test>");
    CHECK(back_meta.grid_index == 37);
    CHECK(back_meta.grid_n == 100);
    CHECK(back_meta.trials == 5000);
    REQUIRE(back.has_counts());
    for (int k = 0; k <= 8; ++k) {
        CHECK(back.counts()[static_cast<std::size_t>(k)] == cs.counts()[static_cast<std::size_t>(k)]);
        CHECK(back.probability(k) == cs.probability(k));
    }
}

TEST_CASE("clicks CSV schema errors") {
    {
        std::istringstream in("# N=8\nwrong\n");
        CHECK_THROWS_AS(read_clicks_csv(in, "<test>"), SchemaError);
    }
    {
        // counts disagree with the declared M
        std::istringstream in("# N=1\n# M=5\nk,count,probability\n0,1,0.5\n1,1,0.5\n");
        CHECK_THROWS_AS(read_clicks_csv(in, "<test>"), SchemaError);
    }
    {
        // missing N
        std::istringstream in("k,count,probability\n0,1,1\n");
        CHECK_THROWS_AS(read_clicks_csv(in, "<test>"), SchemaError);
    }
}
