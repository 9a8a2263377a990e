#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fadelab/detector.hpp"
#include "fadelab/errors.hpp"
#include "fadelab/jacobi.hpp"
#include "fadelab/nonclassicality.hpp"
#include "fadelab/pdt.hpp"
#include "fadelab/rng.hpp"
#include "fadelab/source.hpp"

using namespace fadelab;
using Pnd = PhotonNumberDistribution;

namespace {

const DetectorConfig kPaperDetector{8, 0.22, 0.0};

std::vector<ClickStatistics> analytic_ensemble(const Pnd& source, const DetectorConfig& cfg,
                                               int n) {
    std::vector<ClickStatistics> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j)
        out.push_back(click_statistics(apply_loss(source, static_cast<double>(j) / n), cfg));
    return out;
}

std::vector<ClickStatistics> sampled_ensemble(const Pnd& source, const DetectorConfig& cfg,
                                              int n, std::int64_t trials, std::uint64_t seed) {
    std::vector<ClickStatistics> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        const auto cs = click_statistics(apply_loss(source, static_cast<double>(j) / n), cfg);
        out.push_back(sample_clicks(cs, trials, derive_seed(seed, {static_cast<std::uint64_t>(j)})));
    }
    return out;
}

DiscretePdt point_mass(int n, int j) {
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    w[static_cast<std::size_t>(j)] = 1.0;
    return DiscretePdt(n, std::move(w));
}

} // namespace

TEST_CASE("jacobi eigenvalues") {
    SUBCASE("identity") {
        std::vector<double> a(25, 0.0);
        for (int i = 0; i < 5; ++i) a[static_cast<std::size_t>(i * 5 + i)] = 1.0;
        const auto eig = jacobi_eigenvalues(a, 5);
        for (double e : eig) CHECK(e == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("2x2 closed form") {
        const auto eig = jacobi_eigenvalues({1.0, 0.5, 0.5, 0.2}, 2);
        // (1.2 - sqrt(1.64))/2
        CHECK(eig[0] == doctest::Approx(-0.040312423743284869).epsilon(1e-13));
        CHECK(eig[1] == doctest::Approx((1.2 + std::sqrt(1.64)) / 2.0).epsilon(1e-13));
    }
    SUBCASE("rank-one Gram matrix is singular for any x") {
        for (double x : {0.0, 0.3, 0.77, 1.0}) {
            const auto eig = jacobi_eigenvalues({1.0, x, x, x * x}, 2);
            CHECK(std::fabs(eig[0]) < 1e-15 * (1.0 + x * x));
        }
    }
    SUBCASE("trace, Frobenius norm and determinant identities on random matrices") {
        Rng rng(909);
        for (int rep = 0; rep < 200; ++rep) {
            const int d = 2 + static_cast<int>(rng.next_below(4)); // 2..5
            std::vector<double> a(static_cast<std::size_t>(d) * d);
            for (int r = 0; r < d; ++r)
                for (int c = r; c < d; ++c) {
                    const double v = 2.0 * rng.next_double() - 1.0;
                    a[static_cast<std::size_t>(r * d + c)] = v;
                    a[static_cast<std::size_t>(c * d + r)] = v;
                }
            // determinant by Gaussian elimination (test-side oracle)
            std::vector<double> lu = a;
            double det = 1.0;
            for (int col = 0; col < d; ++col) {
                int piv = col;
                for (int r = col + 1; r < d; ++r)
                    if (std::fabs(lu[static_cast<std::size_t>(r * d + col)]) >
                        std::fabs(lu[static_cast<std::size_t>(piv * d + col)]))
                        piv = r;
                if (piv != col) {
                    for (int c = 0; c < d; ++c)
                        std::swap(lu[static_cast<std::size_t>(col * d + c)],
                                  lu[static_cast<std::size_t>(piv * d + c)]);
                    det = -det;
                }
                const double p = lu[static_cast<std::size_t>(col * d + col)];
                det *= p;
                if (p == 0.0) break;
                for (int r = col + 1; r < d; ++r) {
                    const double f = lu[static_cast<std::size_t>(r * d + col)] / p;
                    for (int c = col; c < d; ++c)
                        lu[static_cast<std::size_t>(r * d + c)] -=
                            f * lu[static_cast<std::size_t>(col * d + c)];
                }
            }
            double tr = 0.0, fro2 = 0.0;
            for (int r = 0; r < d; ++r) {
                tr += a[static_cast<std::size_t>(r * d + r)];
                for (int c = 0; c < d; ++c)
                    fro2 += a[static_cast<std::size_t>(r * d + c)] *
                            a[static_cast<std::size_t>(r * d + c)];
            }
            const auto eig = jacobi_eigenvalues(a, d);
            double esum = 0.0, esum2 = 0.0, eprod = 1.0;
            for (double e : eig) {
                esum += e;
                esum2 += e * e;
                eprod *= e;
            }
            CHECK(std::fabs(esum - tr) < 1e-12);
            CHECK(std::fabs(esum2 - fro2) < 1e-12);
            CHECK(std::fabs(eprod - det) < 1e-11);
            for (std::size_t i = 1; i < eig.size(); ++i) CHECK(eig[i - 1] <= eig[i]);
        }
    }
    SUBCASE("non-symmetric input violates the contract") {
        CHECK_THROWS_AS(jacobi_eigenvalues({1.0, 0.5, 0.1, 1.0}, 2), DomainError);
    }
}

TEST_CASE("moment matrix structure") {
    SUBCASE("vacuum moments give the all-ones matrix with eigenvalues {0, dim}") {
        const MomentVector mv = analytic_moments(Pnd::fock(0), kPaperDetector);
        const MomentMatrix m(mv, 2);
        CHECK(m.dim() == 2);
        CHECK(min_eigenvalue(m) == doctest::Approx(0.0).epsilon(1e-14));
        const MomentMatrix m8(mv, 8);
        CHECK(min_eigenvalue(m8) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("coherent K=2 matrix is singular") {
        const MomentVector mv =
            analytic_moments(Pnd::coherent(1.3, Pnd::kAutoNmax, 1e-14), kPaperDetector);
        CHECK(std::fabs(min_eigenvalue(mv, 2)) < 1e-13);
    }
    SUBCASE("Hankel symmetry and entry range") {
        const MomentVector mv = analytic_moments(Pnd::squeezed_vacuum(1.0), kPaperDetector);
        const MomentMatrix m(mv, 8);
        for (int s = 0; s < m.dim(); ++s)
            for (int t = 0; t < m.dim(); ++t) {
                CHECK(m.at(s, t) == m.at(t, s));
                CHECK(m.at(s, t) >= 0.0);
                CHECK(m.at(s, t) <= 1.0);
            }
        CHECK(m.at(0, 0) == 1.0);
    }
    SUBCASE("odd or oversized order throws") {
        const MomentVector mv = analytic_moments(Pnd::fock(0), kPaperDetector);
        CHECK_THROWS_AS(MomentMatrix(mv, 3), DomainError);
        CHECK_THROWS_AS(MomentMatrix(mv, 10), DomainError);
    }
}

TEST_CASE("squeezed-vacuum regression fixture at r=1") {
    // frozen from a 40-digit evaluation of the closed-form moments:
    // the K=8 minimal eigenvalue is positive (the phase-insensitive click
    // test does not certify squeezed vacuum; cf. decisions record)
    const MomentVector mv = analytic_moments(Pnd::squeezed_vacuum(1.0), kPaperDetector);
    CHECK(mv[1] == doctest::Approx(0.96452336186304112).epsilon(1e-9));
    CHECK(mv[8] == doctest::Approx(0.80560382870239801).epsilon(1e-9));
    const double e8 = min_eigenvalue(mv, 8);
    CHECK(e8 == doctest::Approx(8.1225043216928145e-10).epsilon(5e-4));
    CHECK(min_eigenvalue(mv, 2) == doctest::Approx(0.0016129635779240181).epsilon(1e-9));
}

TEST_CASE("emitter array is certified nonclassical at the calibrated point") {
    // 20 emitters at the 2.7-clicks operating point: all orders negative
    const Pnd src = Pnd::emitter_array(20, 0.74095549);
    const MomentVector mv = analytic_moments(src, kPaperDetector);
    CHECK(min_eigenvalue(mv, 2) == doctest::Approx(-2.6307e-3).epsilon(1e-3));
    CHECK(min_eigenvalue(mv, 8) == doctest::Approx(-1.4826e-2).epsilon(1e-3));
}

TEST_CASE("classicality bound for coherent and thermal states") {
    for (const double mean : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        for (const double eff : {0.22, 1.0}) {
            const DetectorConfig cfg{8, eff, 0.0};
            const MomentVector c = analytic_moments(Pnd::coherent(mean), cfg);
            const MomentVector t = analytic_moments(Pnd::thermal(mean), cfg);
            for (int order : {2, 4, 6, 8}) {
                CHECK(min_eigenvalue(c, order) >= -1e-10);
                CHECK(min_eigenvalue(t, order) >= -1e-10);
            }
            CHECK(std::fabs(min_eigenvalue(c, 2)) <= 1e-10);
        }
    }
}

TEST_CASE("failed PSD at order K implies failed PSD at any larger order") {
    // M^(K) is a principal submatrix of M^(K'), so by eigenvalue interlacing
    // lambda_min(M^(K')) <= lambda_min(M^(K))
    const Pnd src = Pnd::emitter_array(20, 0.74095549);
    for (double eta : {1.0, 0.6, 0.2}) {
        const MomentVector mv = analytic_moments(apply_loss(src, eta), kPaperDetector);
        double prev = std::numeric_limits<double>::infinity();
        for (int order : {2, 4, 6, 8}) {
            const double e = min_eigenvalue(mv, order);
            CHECK(e <= prev + 1e-14);
            prev = e;
        }
        if (min_eigenvalue(mv, 2) < 0.0) CHECK(min_eigenvalue(mv, 8) < 0.0);
    }
}

TEST_CASE("classify") {
    auto result = [](double e, double d) {
        NonclassicalityResult r;
        r.e_min = e;
        r.delta_e = d;
        r.significance = d > 0.0 ? e / d : (e < -1e-12 ? -std::numeric_limits<double>::infinity() : 0.0);
        return r;
    };
    CHECK(classify(result(-0.01, 0.001)) == Classification::nonclassical);
    CHECK(classify(result(0.0234, 0.0005)) == Classification::consistent_classical);
    CHECK(classify(result(-0.002, 0.001)) == Classification::inconclusive);
    // deterministic encodings
    CHECK(classify(result(-0.5, 0.0)) == Classification::nonclassical);
    CHECK(classify(result(0.5, 0.0)) == Classification::consistent_classical);
}

TEST_CASE("atmospheric moments") {
    const int n = 20;
    const auto ens = analytic_ensemble(Pnd::emitter_array(15, 0.6), kPaperDetector, n);
    SUBCASE("point mass reduces to the per-level moments") {
        for (int j : {0, 7, n}) {
            const DiscretePdt pm = point_mass(n, j);
            for (int l = 0; l <= 8; ++l)
                CHECK(atmospheric_moment(ens, pm, l) ==
                      doctest::Approx(moments_from_clicks(ens[static_cast<std::size_t>(j)], l))
                          .epsilon(1e-14));
        }
    }
    SUBCASE("order zero gives 1") {
        const DiscretePdt bb = beta_binomial(n, 2.0, 2.0);
        CHECK(atmospheric_moment(ens, bb, 0) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("grid mismatch is rejected") {
        const DiscretePdt wrong = beta_binomial(n + 1, 2.0, 2.0);
        CHECK_THROWS_AS(atmospheric_moment(ens, wrong, 1), IncompleteEnsembleError);
    }
}

TEST_CASE("merging commutes with moment extraction over random pdts") {
    const int n = 25;
    const auto ens = analytic_ensemble(Pnd::emitter_array(12, 0.55), kPaperDetector, n);
    Rng rng(5150);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> w(static_cast<std::size_t>(n) + 1);
        for (double& v : w) v = rng.next_double();
        const DiscretePdt pdt(n, std::move(w));
        // merged statistics path
        std::vector<double> merged(9, 0.0);
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= 8; ++k)
                merged[static_cast<std::size_t>(k)] +=
                    pdt.weight(j) * ens[static_cast<std::size_t>(j)].probability(k);
        const ClickStatistics merged_cs(8, merged);
        for (int l = 0; l <= 8; ++l)
            CHECK(std::fabs(atmospheric_moment(ens, pdt, l) -
                            moments_from_clicks(merged_cs, l)) < 1e-12);
    }
}

TEST_CASE("analytic result encodes deterministic significance") {
    const int n = 10;
    const auto classical = analytic_ensemble(Pnd::coherent(2.0), kPaperDetector, n);
    const auto quantum = analytic_ensemble(Pnd::emitter_array(20, 0.74), kPaperDetector, n);
    const DiscretePdt top = point_mass(n, n);
    const NonclassicalityResult rc = analytic_result(classical, top, 8);
    CHECK(rc.delta_e == 0.0);
    CHECK(rc.significance == 0.0);
    CHECK(classify(rc) == Classification::consistent_classical);
    const NonclassicalityResult rq = analytic_result(quantum, top, 8);
    CHECK(rq.delta_e == 0.0);
    CHECK(rq.significance == -std::numeric_limits<double>::infinity());
    CHECK(classify(rq) == Classification::nonclassical);
}

TEST_CASE("bootstrap determinism and trivial cases") {
    const int n = 4;
    const auto ens =
        sampled_ensemble(Pnd::emitter_array(20, 0.74), kPaperDetector, n, 20000, 424242);
    const DiscretePdt bb = beta_binomial(n, 3.0, 1.0);
    const NonclassicalityResult a = bootstrap_error(ens, bb, 8, 200, 11);
    const NonclassicalityResult b = bootstrap_error(ens, bb, 8, 200, 11);
    CHECK(a.e_min == b.e_min);
    CHECK(a.delta_e == b.delta_e);
    const NonclassicalityResult c = bootstrap_error(ens, bb, 8, 200, 12);
    CHECK(a.delta_e != c.delta_e);
    SUBCASE("thread count does not change the estimate") {
        const NonclassicalityResult d = bootstrap_error(ens, bb, 8, 200, 11, 4);
        CHECK(d.e_min == a.e_min);
        CHECK(d.delta_e == a.delta_e);
    }
    SUBCASE("probabilities-only ensembles are rejected") {
        const auto analytic = analytic_ensemble(Pnd::coherent(1.0), kPaperDetector, n);
        CHECK_THROWS_AS(bootstrap_error(analytic, bb, 8, 200, 1), CountsRequiredError);
    }
    SUBCASE("deterministic statistics give zero error") {
        // point-mass pdt at eta=0 selects vacuum statistics: every resample
        // reproduces counts (M, 0, ..., 0)
        const DiscretePdt pm = point_mass(n, 0);
        const NonclassicalityResult r = bootstrap_error(ens, pm, 8, 100, 5);
        CHECK(r.delta_e == 0.0);
        CHECK(classify(r) == Classification::consistent_classical);
    }
}

TEST_CASE("bootstrap error scales as 1/sqrt(M)") {
    const int n = 1;
    const Pnd src = Pnd::emitter_array(20, 0.74);
    const DiscretePdt top = point_mass(n, n);
    const auto small = sampled_ensemble(src, kPaperDetector, n, 10000, 21);
    const auto large = sampled_ensemble(src, kPaperDetector, n, 1000000, 22);
    const double d_small = bootstrap_error(small, top, 8, 1500, 77).delta_e;
    const double d_large = bootstrap_error(large, top, 8, 1500, 78).delta_e;
    const double ratio = d_small / d_large;
    CHECK(ratio > 10.0 * 0.8);
    CHECK(ratio < 10.0 * 1.2);
}

TEST_CASE("coherent null calibration: significances stay within the threshold") {
    // a classical source must not trigger the detector of nonclassicality
    const int n = 1;
    const Pnd src = Pnd::coherent(2.0);
    const DiscretePdt top = point_mass(n, n);
    int outside = 0;
    const int experiments = 60;
    for (int i = 0; i < experiments; ++i) {
        const auto ens =
            sampled_ensemble(src, kPaperDetector, n, 100000, 1000 + static_cast<std::uint64_t>(i));
        const NonclassicalityResult r =
            bootstrap_error(ens, top, 8, 300, 500 + static_cast<std::uint64_t>(i));
        if (std::fabs(r.significance) > 3.0) ++outside;
    }
    CHECK(outside <= 1);
}
