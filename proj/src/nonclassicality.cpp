#include "fadelab/nonclassicality.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "fadelab/errors.hpp"
#include "fadelab/jacobi.hpp"
#include "fadelab/rng.hpp"

namespace fadelab {

namespace {

// Negativity below this magnitude counts as "no violation": truncated
// photon statistics and eigenvalue rounding bias deterministic minimal
// eigenvalues at the 1e-11 scale, so the PSD boundary is drawn at 1e-10
// (the same bound the classicality checks use).
constexpr double kPsdTol = 1e-10;

double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

void check_ensemble(const std::vector<ClickStatistics>& ensemble, const DiscretePdt& pdt) {
    if (ensemble.size() != pdt.size())
        throw IncompleteEnsembleError("ensemble does not cover the PDT grid: have " +
                                      std::to_string(ensemble.size()) + " members for n=" +
                                      std::to_string(pdt.n()));
    for (std::size_t j = 1; j < ensemble.size(); ++j)
        if (ensemble[j].n_bins() != ensemble[0].n_bins())
            throw SchemaError("ensemble members disagree on the number of detector bins");
}

double significance_of(double e_min, double delta_e) {
    if (delta_e > 0.0) return e_min / delta_e;
    if (e_min < -kPsdTol) return -std::numeric_limits<double>::infinity();
    return 0.0;
}

// Moment extraction matrix A[l][k] = C(N-k,l)/C(N,l), applied to click
// probabilities; shared by the point estimate and every bootstrap replicate.
std::vector<std::vector<double>> extraction_matrix(int n_bins) {
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n_bins) + 1,
                                       std::vector<double>(static_cast<std::size_t>(n_bins) + 1,
                                                           0.0));
    for (int l = 0; l <= n_bins; ++l) {
        const double denom = choose(n_bins, l);
        for (int k = 0; k <= n_bins - l; ++k)
            a[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] =
                choose(n_bins - k, l) / denom;
    }
    return a;
}

} // namespace

MomentMatrix::MomentMatrix(const MomentVector& mv, int order) : order_(order) {
    if (order < 2 || order % 2 != 0)
        throw DomainError("moment matrix order K must be a positive even integer");
    if (order > mv.max_order())
        throw DomainError("moment matrix order K exceeds the available moments (K > N)");
    entries_.assign(mv.values.begin(), mv.values.begin() + order + 1);
    if (std::fabs(entries_[0] - 1.0) > 1e-9)
        throw DomainError("moment vector is not normalized (m_0 != 1)");
}

double min_eigenvalue(const MomentMatrix& m) {
    const int d = m.dim();
    std::vector<double> a(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t)
            a[static_cast<std::size_t>(s) * static_cast<std::size_t>(d) +
              static_cast<std::size_t>(t)] = m.at(s, t);
    return jacobi_eigenvalues(std::move(a), d).front();
}

double min_eigenvalue(const MomentVector& mv, int order) {
    return min_eigenvalue(MomentMatrix(mv, order));
}

const char* to_string(Classification c) {
    switch (c) {
    case Classification::nonclassical: return "NONCLASSICAL";
    case Classification::inconclusive: return "INCONCLUSIVE";
    case Classification::consistent_classical: return "CONSISTENT_CLASSICAL";
    }
    return "?";
}

Classification classify(const NonclassicalityResult& r, double threshold) {
    if (r.significance <= -threshold) return Classification::nonclassical;
    // A nonnegative minimal eigenvalue (up to the PSD tolerance) is the
    // classical expectation, however significantly positive it is; only a
    // negative-but-insignificant estimate stays open.
    if (r.e_min >= -kPsdTol) return Classification::consistent_classical;
    return Classification::inconclusive;
}

double atmospheric_moment(const std::vector<ClickStatistics>& ensemble, const DiscretePdt& pdt,
                          int l) {
    check_ensemble(ensemble, pdt);
    const int N = ensemble.front().n_bins();
    if (l < 0 || l > N) throw DomainError("atmospheric_moment: order must lie in [0, N]");
    double s = 0.0;
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const double w = pdt.weight(static_cast<int>(j));
        if (w == 0.0) continue;
        s += w * moments_from_clicks(ensemble[j], l);
    }
    return s;
}

MomentVector atmospheric_moment_vector(const std::vector<ClickStatistics>& ensemble,
                                       const DiscretePdt& pdt) {
    check_ensemble(ensemble, pdt);
    const int N = ensemble.front().n_bins();
    MomentVector mv;
    mv.values.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (int l = 0; l <= N; ++l) mv.values[static_cast<std::size_t>(l)] =
        atmospheric_moment(ensemble, pdt, l);
    return mv;
}

NonclassicalityResult analytic_result(const std::vector<ClickStatistics>& ensemble,
                                      const DiscretePdt& pdt, int order) {
    const MomentVector mv = atmospheric_moment_vector(ensemble, pdt);
    NonclassicalityResult r;
    r.e_min = min_eigenvalue(mv, order);
    r.delta_e = 0.0;
    r.significance = significance_of(r.e_min, 0.0);
    r.order = order;
    return r;
}

NonclassicalityResult bootstrap_error(const std::vector<ClickStatistics>& ensemble,
                                      const DiscretePdt& pdt, int order, int resamples,
                                      std::uint64_t seed, int threads) {
    check_ensemble(ensemble, pdt);
    if (resamples < 2)
        throw ParameterError("bootstrap_error: need at least 2 resamples");
    for (std::size_t j = 0; j < ensemble.size(); ++j)
        if (pdt.weight(static_cast<int>(j)) > 0.0 && !ensemble[j].has_counts())
            throw CountsRequiredError("bootstrap_error: ensemble member at eta=" +
                                      std::to_string(pdt.eta(static_cast<int>(j))) +
                                      " carries no counts");
    const int N = ensemble.front().n_bins();
    const auto a = extraction_matrix(N);

    // Support of the pdt; levels with zero weight never enter the estimate
    // and are not resampled.
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < ensemble.size(); ++j)
        if (pdt.weight(static_cast<int>(j)) > 0.0) support.push_back(j);

    const MomentVector point_mv = atmospheric_moment_vector(ensemble, pdt);
    NonclassicalityResult r;
    r.e_min = min_eigenvalue(point_mv, order);
    r.order = order;
    r.seed = seed;
    r.bootstrap_resamples = resamples;

    std::vector<double> replicates(static_cast<std::size_t>(resamples), 0.0);
    auto run_replicate = [&](int b) {
        std::vector<double> mom(static_cast<std::size_t>(N) + 1, 0.0);
        std::vector<std::int64_t> counts(static_cast<std::size_t>(N) + 1, 0);
        for (std::size_t j : support) {
            const ClickStatistics& cs = ensemble[j];
            Rng rng(derive_seed(seed, {0x626f6f74ULL, static_cast<std::uint64_t>(b),
                                       static_cast<std::uint64_t>(j)}));
            sample_multinomial(rng, cs.trials(), cs.probabilities(), counts);
            const double w = pdt.weight(static_cast<int>(j));
            const double inv_m = 1.0 / static_cast<double>(cs.trials());
            for (int l = 0; l <= N; ++l) {
                double ml = 0.0;
                const auto& al = a[static_cast<std::size_t>(l)];
                for (int k = 0; k <= N - l; ++k)
                    ml += al[static_cast<std::size_t>(k)] *
                          static_cast<double>(counts[static_cast<std::size_t>(k)]);
                mom[static_cast<std::size_t>(l)] += w * ml * inv_m;
            }
        }
        MomentVector mv;
        mv.values = std::move(mom);
        replicates[static_cast<std::size_t>(b)] = min_eigenvalue(mv, order);
    };

    if (threads <= 1) {
        for (int b = 0; b < resamples; ++b) run_replicate(b);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min(threads, resamples);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const int b = next.fetch_add(1);
                    if (b >= resamples) return;
                    run_replicate(b);
                }
            });
        for (auto& th : pool) th.join();
    }

    // Two-pass sample standard deviation in fixed replicate order; bitwise
    // identical replicates mean no variability at all.
    double lo = replicates[0], hi = replicates[0];
    double mean = 0.0;
    for (double e : replicates) {
        mean += e;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    mean /= static_cast<double>(resamples);
    double ss = 0.0;
    for (double e : replicates) ss += (e - mean) * (e - mean);
    r.delta_e = lo == hi ? 0.0 : std::sqrt(ss / static_cast<double>(resamples - 1));
    r.significance = significance_of(r.e_min, r.delta_e);
    return r;
}

} // namespace fadelab
