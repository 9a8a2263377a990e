#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fadelab/rng.hpp"
#include "fadelab/source.hpp"

namespace fadelab {

// N-bin time-multiplexed click detector with linear per-bin response
// Gamma(n) = efficiency * n / N + dark_click_rate. Uniform bin splitting.
struct DetectorConfig {
    int n_bins = 8;
    double efficiency = 0.22;
    double dark_click_rate = 0.0; // mean dark exposure per bin per pulse

    void validate() const;
};

// (N+1)-outcome click distribution; optionally carries the finite-trial
// counts it was estimated from, in which case c_k == counts_k / trials.
class ClickStatistics {
public:
    ClickStatistics(int n_bins, std::vector<double> probabilities);
    ClickStatistics(int n_bins, std::vector<std::int64_t> counts);

    int n_bins() const { return n_bins_; }
    double probability(int k) const { return c_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& probabilities() const { return c_; }

    bool has_counts() const { return counts_.has_value(); }
    const std::vector<std::int64_t>& counts() const;
    std::int64_t trials() const { return trials_; }

private:
    int n_bins_;
    std::vector<double> c_;
    std::optional<std::vector<std::int64_t>> counts_;
    std::int64_t trials_ = 0;
};

// Normally ordered no-click moments <:m^l:> for l = 0..N; value(0) == 1,
// entries lie in [0,1] and are nonincreasing in l for physical statistics.
struct MomentVector {
    std::vector<double> values;

    int max_order() const { return static_cast<int>(values.size()) - 1; }
    double operator[](int l) const { return values[static_cast<std::size_t>(l)]; }
};

// <:m^l:> = e^{-l dark} sum_n p_n (1 - l eff/N)^n.
MomentVector analytic_moments(const PhotonNumberDistribution& pnd, const DetectorConfig& cfg);

// Click distribution of the detector for the given photon statistics:
// c_k = C(N,k) sum_{j<=k} C(k,j) (-1)^j <:m^{N-k+j}:>.
ClickStatistics click_statistics(const PhotonNumberDistribution& pnd, const DetectorConfig& cfg);

// Moment extraction directly from click statistics:
// <:m^l:> = sum_{k=0}^{N-l} [C(N-k,l)/C(N,l)] c_k.
double moments_from_clicks(const ClickStatistics& cs, int l);
MomentVector moment_vector_from_clicks(const ClickStatistics& cs);

double mean_clicks(const ClickStatistics& cs);

// Multinomial finite-sample emulation of M pulses.
ClickStatistics sample_clicks(const ClickStatistics& cs, std::int64_t trials, std::uint64_t seed);

// Independent brute-force oracle: per trial draws a photon number, routes
// every photon to a uniformly random bin surviving with prob `efficiency`,
// adds per-bin dark clicks, and counts the bins that fired. Work is split
// into fixed shards with derived seeds so the result is reproducible for
// any thread count.
ClickStatistics monte_carlo_clicks(const PhotonNumberDistribution& pnd, const DetectorConfig& cfg,
                                   std::int64_t trials, std::uint64_t seed, int threads = 1);

// CSV "k,count,probability" with "# key=value" metadata header lines.
struct ClickCsvMetadata {
    int n_bins = 0;
    std::int64_t trials = 0; // 0 for analytic statistics
    int grid_index = -1;     // j such that eta = j/grid_n; -1 when unused
    int grid_n = -1;
    double eta = -1.0;
    std::string label;
};

void write_clicks_csv(const ClickStatistics& cs, const ClickCsvMetadata& meta, std::ostream& out);
void write_clicks_csv(const ClickStatistics& cs, const ClickCsvMetadata& meta,
                      const std::string& path);
std::pair<ClickStatistics, ClickCsvMetadata> read_clicks_csv(std::istream& in,
                                                             const std::string& context);
std::pair<ClickStatistics, ClickCsvMetadata> read_clicks_csv_file(const std::string& path);

} // namespace fadelab
