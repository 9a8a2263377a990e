#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fadelab/detector.hpp"
#include "fadelab/pdt.hpp"

namespace fadelab {

// Hankel matrix of normally ordered no-click moments: square of side
// K/2 + 1 with entry (s,t) = <:m^{s+t}:>. Positive semidefinite for every
// classical light field; a negative eigenvalue certifies nonclassicality.
class MomentMatrix {
public:
    MomentMatrix(const MomentVector& mv, int order);

    int order() const { return order_; }
    int dim() const { return order_ / 2 + 1; }
    double at(int s, int t) const {
        return entries_[static_cast<std::size_t>(s + t)];
    }
    // Moments m_0..m_K backing the Hankel structure.
    const std::vector<double>& moments() const { return entries_; }

private:
    int order_;
    std::vector<double> entries_;
};

// Smallest eigenvalue e^(K) of the matrix of moments.
double min_eigenvalue(const MomentMatrix& m);

// Convenience: e^(K) from a moment vector.
double min_eigenvalue(const MomentVector& mv, int order);

enum class Classification { nonclassical, inconclusive, consistent_classical };

const char* to_string(Classification c);

struct NonclassicalityResult {
    double e_min = 0.0;
    double delta_e = 0.0;
    // e_min / delta_e. Deterministic (delta_e == 0) results encode a
    // certain violation as -infinity and "no violation" as 0.
    double significance = 0.0;
    int order = 0;
    std::uint64_t seed = 0;
    int bootstrap_resamples = 0;
    std::string channel;
};

// NONCLASSICAL iff significance <= -threshold; CONSISTENT_CLASSICAL iff the
// minimal eigenvalue is nonnegative (up to the 1e-10 PSD tolerance);
// INCONCLUSIVE for a negative but insignificant eigenvalue.
Classification classify(const NonclassicalityResult& r, double threshold = 3.0);

// Weighted moment of an attenuation ensemble (the sampling formula for a
// fluctuating channel): sum_j w_j sum_{k<=N-l} [C(N-k,l)/C(N,l)] c_k(eta_j).
// `ensemble` holds one ClickStatistics per grid point eta_j = j/n, in order;
// its size must be pdt.size() and every member must share N.
double atmospheric_moment(const std::vector<ClickStatistics>& ensemble, const DiscretePdt& pdt,
                          int l);

MomentVector atmospheric_moment_vector(const std::vector<ClickStatistics>& ensemble,
                                       const DiscretePdt& pdt);

// Deterministic result (delta_e = 0) from analytic per-level statistics.
NonclassicalityResult analytic_result(const std::vector<ClickStatistics>& ensemble,
                                      const DiscretePdt& pdt, int order);

// Nonparametric multinomial bootstrap: every ensemble member must carry
// counts. For b = 1..resamples the per-level count vectors are redrawn from
// their empirical distributions (seed derived per (replicate, level), so the
// result does not depend on the thread count), e^(K) is recomputed, and
// delta_e is the sample standard deviation of the replicates. The point
// estimate comes from the unresampled empirical frequencies.
NonclassicalityResult bootstrap_error(const std::vector<ClickStatistics>& ensemble,
                                      const DiscretePdt& pdt, int order, int resamples,
                                      std::uint64_t seed, int threads = 1);

} // namespace fadelab
