#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fadelab/detector.hpp"
#include "fadelab/nonclassicality.hpp"
#include "fadelab/pdt.hpp"
#include "fadelab/source.hpp"

namespace fadelab {

// Click statistics recorded at every attenuation level of the equidistant
// grid eta_j = j/n. Each member must be comparable to the others: same
// detector, same trial budget, only the transmittance differs.
struct ChannelEnsemble {
    enum class Provenance { simulated, ingested };

    int grid_n = 0;
    DetectorConfig detector;
    std::vector<ClickStatistics> statistics; // index j = 0..grid_n
    Provenance provenance = Provenance::simulated;
    std::int64_t trials_per_level = 0; // 0 for analytic statistics
    std::uint64_t seed = 0;

    double eta(int j) const { return static_cast<double>(j) / grid_n; }
    bool has_counts() const { return trials_per_level > 0; }
    void validate() const;
};

struct SamplingMode {
    // trials == 0: analytic probabilities only. trials > 0: multinomial
    // counts with the given trial budget per attenuation level.
    std::int64_t trials = 0;
    std::uint64_t seed = 0;

    static SamplingMode analytic() { return {}; }
    static SamplingMode sampled(std::int64_t trials, std::uint64_t seed) {
        return {trials, seed};
    }
};

// Per-level statistics of the source state after binomial loss eta_j through
// the detector. Levels are independent; per-level seeds derive from the
// root seed and j, so the ensemble is reproducible for any thread count.
ChannelEnsemble build_ensemble(const PhotonNumberDistribution& source, const DetectorConfig& cfg,
                               int grid_n, const SamplingMode& mode, int threads = 1);

// Eq-style data merging: c^atm_k = sum_j w_j c_k(eta_j). The merged
// statistics are probabilities (no counts); finite-sample error analysis
// resamples per level instead (see bootstrap_error).
ClickStatistics merge_statistics(const ChannelEnsemble& ensemble, const DiscretePdt& pdt);

struct SweepEntry {
    std::vector<double> params;
    std::optional<NonclassicalityResult> result;
    Classification classification = Classification::inconclusive;
    std::string error; // non-empty when the point failed (result absent)
};

struct SweepResult {
    std::vector<std::string> param_names;
    std::vector<SweepEntry> entries;
};

struct AnalysisOptions {
    int order = 8;             // K
    int bootstrap_resamples = 1000;
    std::uint64_t seed = 0;
    int threads = 1;
    double threshold = 3.0;
};

// Nonclassicality of one fluctuating channel: sampling-formula moments,
// minimal eigenvalue, bootstrap error when the ensemble carries counts.
NonclassicalityResult atmospheric_run(const ChannelEnsemble& ensemble, const DiscretePdt& pdt,
                                      const AnalysisOptions& opt);

// Point-mass results for every attenuation level (the fixed-loss reference).
SweepResult constant_loss_sweep(const ChannelEnsemble& ensemble, const AnalysisOptions& opt);

// atmospheric_run after post-selecting the pdt at each threshold; empty
// post-selections are recorded as error entries and the sweep continues.
SweepResult postselection_sweep(const ChannelEnsemble& ensemble, const DiscretePdt& pdt,
                                const AnalysisOptions& opt, const std::vector<double>& thresholds);

// Map from turbulence strength (Rytov variance) to a transmittance model;
// supplied by configuration, the library does not hardcode one.
using RytovMapping = std::function<TransmittanceModel(double)>;

SweepResult rytov_sweep(const ChannelEnsemble& ensemble, const RytovMapping& mapping,
                        const AnalysisOptions& opt, const std::vector<double>& rytov_grid);

// Beta-binomial (alpha, beta) scan in lexicographic grid order.
SweepResult beta_scan(const ChannelEnsemble& ensemble, const AnalysisOptions& opt,
                      const std::vector<double>& alpha_grid, const std::vector<double>& beta_grid);

// Root-finds the common squeeze parameter r (equal across `modes` effective
// modes) so that the detector registers `target_mean_clicks` on average at
// full transmission. Deterministic bisection; tolerance 1e-6 on the clicks.
double calibrate_source(double target_mean_clicks, const DetectorConfig& cfg, int modes);

// Same calibration for the emitter-array source: root-finds the emission
// probability of `modes` single-photon emitters.
double calibrate_emitter_array(double target_mean_clicks, const DetectorConfig& cfg, int modes);

// Directory of per-level click CSVs (schema of write_clicks_csv). Validates
// grid completeness and consistency; errors carry file/line context.
ChannelEnsemble ingest_ensemble(const std::string& directory);
void export_ensemble(const ChannelEnsemble& ensemble, const std::string& directory);

// Plot-ready CSV: one row per parameter point. `header_comments` lines are
// emitted verbatim as leading '#' comments (provenance: digest, seed, ...).
void write_sweep_csv(const SweepResult& sweep, std::ostream& out,
                     const std::vector<std::string>& header_comments = {});
void write_sweep_csv(const SweepResult& sweep, const std::string& path,
                     const std::vector<std::string>& header_comments = {});

} // namespace fadelab
