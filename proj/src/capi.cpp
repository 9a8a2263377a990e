#include "fadelab/fadelab.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "fadelab/detector.hpp"
#include "fadelab/errors.hpp"
#include "fadelab/nonclassicality.hpp"
#include "fadelab/pdt.hpp"
#include "fadelab/pipeline.hpp"
#include "fadelab/source.hpp"

using json = nlohmann::ordered_json;

// Opaque handle definitions wrap the C++ value types.
struct flb_model {
    fadelab::TransmittanceModel v;
};
struct flb_pdt {
    fadelab::DiscretePdt v;
};
struct flb_pnd {
    fadelab::PhotonNumberDistribution v;
};
struct flb_clicks {
    fadelab::ClickStatistics v;
};
struct flb_ensemble {
    fadelab::ChannelEnsemble v;
};
struct flb_result {
    fadelab::NonclassicalityResult v;
};
struct flb_sweep {
    fadelab::SweepResult v;
};

namespace {

thread_local std::string g_last_error;

flb_status status_of(const std::exception& e) {
    using namespace fadelab;
    g_last_error = e.what();
    if (dynamic_cast<const DomainError*>(&e)) return FLB_ERR_DOMAIN;
    if (dynamic_cast<const ParameterError*>(&e)) return FLB_ERR_PARAMETER;
    if (dynamic_cast<const NotAvailableError*>(&e)) return FLB_ERR_NOT_AVAILABLE;
    if (dynamic_cast<const DegenerateError*>(&e)) return FLB_ERR_DEGENERATE;
    if (dynamic_cast<const EmptySelectionError*>(&e)) return FLB_ERR_EMPTY_SELECTION;
    if (dynamic_cast<const EmptyInputError*>(&e)) return FLB_ERR_EMPTY_INPUT;
    if (dynamic_cast<const TruncationError*>(&e)) return FLB_ERR_TRUNCATION;
    if (dynamic_cast<const CountsRequiredError*>(&e)) return FLB_ERR_COUNTS_REQUIRED;
    if (dynamic_cast<const IncompleteEnsembleError*>(&e)) return FLB_ERR_INCOMPLETE_ENSEMBLE;
    if (dynamic_cast<const SchemaError*>(&e)) return FLB_ERR_SCHEMA;
    if (dynamic_cast<const ConfigError*>(&e)) return FLB_ERR_CONFIG;
    if (dynamic_cast<const IoError*>(&e)) return FLB_ERR_IO;
    return FLB_ERR_INTERNAL;
}

template <typename Fn>
flb_status guarded(Fn&& fn) {
    try {
        fn();
        return FLB_OK;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return FLB_ERR_INTERNAL;
    } catch (const std::exception& e) {
        return status_of(e);
    } catch (...) {
        g_last_error = "unknown error";
        return FLB_ERR_INTERNAL;
    }
}

flb_status invalid(const char* msg) {
    g_last_error = msg;
    return FLB_ERR_INVALID_ARGUMENT;
}

fadelab::DetectorConfig to_cfg(const flb_detector_config& c) {
    fadelab::DetectorConfig cfg;
    cfg.n_bins = c.n_bins;
    cfg.efficiency = c.efficiency;
    cfg.dark_click_rate = c.dark_click_rate;
    return cfg;
}

fadelab::AnalysisOptions to_opt(const flb_analysis_options& o) {
    fadelab::AnalysisOptions opt;
    opt.order = o.order;
    opt.bootstrap_resamples = o.bootstrap_resamples;
    opt.seed = o.seed;
    opt.threads = o.threads;
    opt.threshold = o.threshold;
    return opt;
}

flb_classification to_c(fadelab::Classification c) {
    switch (c) {
    case fadelab::Classification::nonclassical: return FLB_NONCLASSICAL;
    case fadelab::Classification::consistent_classical: return FLB_CONSISTENT_CLASSICAL;
    default: return FLB_INCONCLUSIVE;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json result_json(const fadelab::NonclassicalityResult& r, double threshold) {
    json j;
    j["e_min"] = r.e_min;
    j["delta_e"] = r.delta_e;
    if (std::isfinite(r.significance))
        j["significance"] = r.significance;
    else
        j["significance"] = r.significance < 0 ? "-inf" : "+inf";
    j["K"] = r.order;
    j["bootstrap_resamples"] = r.bootstrap_resamples;
    j["seed"] = r.seed;
    j["channel"] = r.channel;
    j["classification"] = fadelab::to_string(fadelab::classify(r, threshold));
    return j;
}

} // namespace

extern "C" {

const char* flb_last_error(void) { return g_last_error.c_str(); }

const char* flb_version(void) { return "0.1.0"; }

void flb_string_free(char* s) { delete[] s; }

/* ---- models ---- */

flb_status flb_model_log_normal(double mu, double sigma, flb_model** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_model{fadelab::TransmittanceModel::log_normal(mu, sigma)};
    });
}

flb_status flb_model_log_normal_var(double mu, double sigma_sq, flb_model** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_model{fadelab::TransmittanceModel::log_normal_var(mu, sigma_sq)};
    });
}

flb_status flb_model_weibull_bw(double eta0, double shape, double scale,
                                double wander_variance, flb_model** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_model{
            fadelab::TransmittanceModel::weibull_bw(eta0, shape, scale, wander_variance)};
    });
}

flb_status flb_model_tabulated(const double* eta, const double* value, size_t n_points,
                               flb_model** out) {
    if (!out || !eta || !value) return invalid("null argument");
    return guarded([&] {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(n_points);
        for (size_t i = 0; i < n_points; ++i) pts.emplace_back(eta[i], value[i]);
        *out = new flb_model{fadelab::TransmittanceModel::tabulated(std::move(pts))};
    });
}

flb_status flb_model_tabulated_csv(const char* path, flb_model** out) {
    if (!out || !path) return invalid("null argument");
    return guarded([&] { *out = new flb_model{fadelab::read_tabulated_csv_file(path)}; });
}

flb_status flb_model_density(const flb_model* m, double eta, double* out) {
    if (!m || !out) return invalid("null argument");
    return guarded([&] { *out = m->v.density(eta); });
}

flb_status flb_model_closed_moment(const flb_model* m, int order, double* out) {
    if (!m || !out) return invalid("null argument");
    return guarded([&] { *out = m->v.closed_moment(order); });
}

flb_status flb_model_truncated_moments(const flb_model* m, double* out3) {
    if (!m || !out3) return invalid("null argument");
    return guarded([&] {
        const auto r = m->v.truncated_raw_moments();
        out3[0] = r[0];
        out3[1] = r[1];
        out3[2] = r[2];
    });
}

void flb_model_free(flb_model* m) { delete m; }

/* ---- pdts ---- */

flb_status flb_pdt_discretize(const flb_model* m, int n, flb_pdt** out) {
    if (!m || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_pdt{fadelab::discretize(m->v, n)}; });
}

flb_status flb_pdt_from_weights(int n, const double* weights, flb_pdt** out) {
    if (!out || !weights) return invalid("null argument");
    return guarded([&] {
        std::vector<double> w(weights, weights + n + 1);
        *out = new flb_pdt{fadelab::DiscretePdt(n, std::move(w))};
    });
}

flb_status flb_pdt_beta_binomial(int n, double alpha, double beta, flb_pdt** out) {
    if (!out) return invalid("null output");
    return guarded([&] { *out = new flb_pdt{fadelab::beta_binomial(n, alpha, beta)}; });
}

flb_status flb_pdt_empirical(const double* samples, size_t n_samples, int n, flb_pdt** out) {
    if (!out || (!samples && n_samples > 0)) return invalid("null argument");
    return guarded([&] {
        std::vector<double> s(samples, samples + n_samples);
        *out = new flb_pdt{fadelab::empirical_pdt(s, n)};
    });
}

flb_status flb_pdt_post_select(const flb_pdt* p, double eta_ps, flb_pdt** out) {
    if (!p || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_pdt{fadelab::post_select(p->v, eta_ps)}; });
}

flb_status flb_pdt_grid_n(const flb_pdt* p, int* out) {
    if (!p || !out) return invalid("null argument");
    *out = p->v.n();
    return FLB_OK;
}

flb_status flb_pdt_weights(const flb_pdt* p, double* out, size_t len) {
    if (!p || !out) return invalid("null argument");
    if (len < p->v.size()) return invalid("weights buffer too small");
    std::memcpy(out, p->v.weights().data(), p->v.size() * sizeof(double));
    return FLB_OK;
}

flb_status flb_pdt_moments(const flb_pdt* p, int max_order, double* raw_out,
                           double* mean_out, double* variance_out, double* skewness_out) {
    if (!p) return invalid("null argument");
    return guarded([&] {
        const auto m = fadelab::transmittance_moments(p->v, max_order);
        if (raw_out)
            std::memcpy(raw_out, m.raw.data(), m.raw.size() * sizeof(double));
        if (mean_out) *mean_out = m.mean;
        if (variance_out) *variance_out = m.variance;
        if (skewness_out)
            *skewness_out = m.skewness ? *m.skewness : std::nan("");
    });
}

flb_status flb_pdt_discretization_errors(const flb_model* m, const flb_pdt* p, double* out3,
                                         double* closed_out3) {
    if (!m || !p || !out3) return invalid("null argument");
    return guarded([&] {
        const auto e = fadelab::discretization_errors(m->v, p->v);
        for (int i = 0; i < 3; ++i) out3[i] = e.vs_truncated[static_cast<size_t>(i)];
        if (closed_out3) {
            for (int i = 0; i < 3; ++i)
                closed_out3[i] = e.vs_closed_form
                                     ? (*e.vs_closed_form)[static_cast<size_t>(i)]
                                     : std::nan("");
        }
    });
}

flb_status flb_pdt_write_csv(const flb_pdt* p, const char* path) {
    if (!p || !path) return invalid("null argument");
    return guarded([&] { fadelab::write_pdt_csv(p->v, std::string(path)); });
}

flb_status flb_pdt_read_csv(const char* path, flb_pdt** out) {
    if (!out || !path) return invalid("null argument");
    return guarded([&] { *out = new flb_pdt{fadelab::read_pdt_csv_file(path)}; });
}

void flb_pdt_free(flb_pdt* p) { delete p; }

/* ---- sources ---- */

flb_status flb_pnd_coherent(double mean_photons, int nmax, flb_pnd** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_pnd{fadelab::PhotonNumberDistribution::coherent(mean_photons, nmax)};
    });
}

flb_status flb_pnd_squeezed_vacuum(double squeeze, int nmax, flb_pnd** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_pnd{fadelab::PhotonNumberDistribution::squeezed_vacuum(squeeze, nmax)};
    });
}

flb_status flb_pnd_multimode_squeezed(const double* squeezes, size_t n_modes, int nmax,
                                      flb_pnd** out) {
    if (!out || (!squeezes && n_modes > 0)) return invalid("null argument");
    return guarded([&] {
        *out = new flb_pnd{fadelab::PhotonNumberDistribution::multimode_squeezed(
            std::span<const double>(squeezes, n_modes), nmax)};
    });
}

flb_status flb_pnd_thermal(double mean_photons, int nmax, flb_pnd** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_pnd{fadelab::PhotonNumberDistribution::thermal(mean_photons, nmax)};
    });
}

flb_status flb_pnd_fock(int n, flb_pnd** out) {
    if (!out) return invalid("null output");
    return guarded([&] { *out = new flb_pnd{fadelab::PhotonNumberDistribution::fock(n)}; });
}

flb_status flb_pnd_emitter_array(int modes, double emit_prob, flb_pnd** out) {
    if (!out) return invalid("null output");
    return guarded([&] {
        *out = new flb_pnd{fadelab::PhotonNumberDistribution::emitter_array(modes, emit_prob)};
    });
}

flb_status flb_pnd_apply_loss(const flb_pnd* p, double eta, flb_pnd** out) {
    if (!p || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_pnd{fadelab::apply_loss(p->v, eta)}; });
}

flb_status flb_pnd_convolve(const flb_pnd* a, const flb_pnd* b, flb_pnd** out) {
    if (!a || !b || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_pnd{fadelab::convolve(a->v, b->v)}; });
}

flb_status flb_pnd_nmax(const flb_pnd* p, int* out) {
    if (!p || !out) return invalid("null argument");
    *out = p->v.nmax();
    return FLB_OK;
}

flb_status flb_pnd_probabilities(const flb_pnd* p, double* out, size_t len) {
    if (!p || !out) return invalid("null argument");
    if (len < p->v.probabilities().size()) return invalid("probability buffer too small");
    std::memcpy(out, p->v.probabilities().data(),
                p->v.probabilities().size() * sizeof(double));
    return FLB_OK;
}

flb_status flb_pnd_tail_bound(const flb_pnd* p, double* out) {
    if (!p || !out) return invalid("null argument");
    *out = p->v.tail_bound();
    return FLB_OK;
}

flb_status flb_pnd_mean(const flb_pnd* p, double* out) {
    if (!p || !out) return invalid("null argument");
    *out = p->v.mean_photon_number();
    return FLB_OK;
}

flb_status flb_pnd_write_csv(const flb_pnd* p, const char* path) {
    if (!p || !path) return invalid("null argument");
    return guarded([&] { fadelab::write_pnd_csv(p->v, std::string(path)); });
}

void flb_pnd_free(flb_pnd* p) { delete p; }

/* ---- detector ---- */

flb_status flb_clicks_from_pnd(const flb_pnd* p, const flb_detector_config* cfg,
                               flb_clicks** out) {
    if (!p || !cfg || !out) return invalid("null argument");
    return guarded([&] {
        *out = new flb_clicks{fadelab::click_statistics(p->v, to_cfg(*cfg))};
    });
}

flb_status flb_clicks_monte_carlo(const flb_pnd* p, const flb_detector_config* cfg,
                                  int64_t trials, uint64_t seed, int threads,
                                  flb_clicks** out) {
    if (!p || !cfg || !out) return invalid("null argument");
    return guarded([&] {
        *out = new flb_clicks{
            fadelab::monte_carlo_clicks(p->v, to_cfg(*cfg), trials, seed, threads)};
    });
}

flb_status flb_clicks_sample(const flb_clicks* c, int64_t trials, uint64_t seed,
                             flb_clicks** out) {
    if (!c || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_clicks{fadelab::sample_clicks(c->v, trials, seed)}; });
}

flb_status flb_clicks_n_bins(const flb_clicks* c, int* out) {
    if (!c || !out) return invalid("null argument");
    *out = c->v.n_bins();
    return FLB_OK;
}

flb_status flb_clicks_probabilities(const flb_clicks* c, double* out, size_t len) {
    if (!c || !out) return invalid("null argument");
    if (len < c->v.probabilities().size()) return invalid("probability buffer too small");
    std::memcpy(out, c->v.probabilities().data(),
                c->v.probabilities().size() * sizeof(double));
    return FLB_OK;
}

flb_status flb_clicks_counts(const flb_clicks* c, int64_t* counts_out, size_t len,
                             int64_t* trials_out) {
    if (!c) return invalid("null argument");
    if (trials_out) *trials_out = c->v.has_counts() ? c->v.trials() : 0;
    if (counts_out) {
        return guarded([&] {
            const auto& counts = c->v.counts();
            if (len < counts.size()) throw fadelab::DomainError("counts buffer too small");
            std::memcpy(counts_out, counts.data(), counts.size() * sizeof(int64_t));
        });
    }
    return FLB_OK;
}

flb_status flb_clicks_moment(const flb_clicks* c, int order, double* out) {
    if (!c || !out) return invalid("null argument");
    return guarded([&] { *out = fadelab::moments_from_clicks(c->v, order); });
}

flb_status flb_clicks_mean(const flb_clicks* c, double* out) {
    if (!c || !out) return invalid("null argument");
    *out = fadelab::mean_clicks(c->v);
    return FLB_OK;
}

void flb_clicks_free(flb_clicks* c) { delete c; }

/* ---- ensembles ---- */

flb_status flb_ensemble_build(const flb_pnd* source, const flb_detector_config* cfg,
                              int grid_n, int64_t trials, uint64_t seed, int threads,
                              flb_ensemble** out) {
    if (!source || !cfg || !out) return invalid("null argument");
    return guarded([&] {
        const auto mode = trials > 0 ? fadelab::SamplingMode::sampled(trials, seed)
                                     : fadelab::SamplingMode::analytic();
        *out = new flb_ensemble{
            fadelab::build_ensemble(source->v, to_cfg(*cfg), grid_n, mode, threads)};
    });
}

flb_status flb_ensemble_ingest(const char* directory, flb_ensemble** out) {
    if (!directory || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_ensemble{fadelab::ingest_ensemble(directory)}; });
}

flb_status flb_ensemble_export(const flb_ensemble* e, const char* directory) {
    if (!e || !directory) return invalid("null argument");
    return guarded([&] { fadelab::export_ensemble(e->v, directory); });
}

flb_status flb_ensemble_grid_n(const flb_ensemble* e, int* out) {
    if (!e || !out) return invalid("null argument");
    *out = e->v.grid_n;
    return FLB_OK;
}

flb_status flb_ensemble_detector(const flb_ensemble* e, flb_detector_config* out) {
    if (!e || !out) return invalid("null argument");
    out->n_bins = e->v.detector.n_bins;
    out->efficiency = e->v.detector.efficiency;
    out->dark_click_rate = e->v.detector.dark_click_rate;
    return FLB_OK;
}

flb_status flb_ensemble_trials(const flb_ensemble* e, int64_t* out) {
    if (!e || !out) return invalid("null argument");
    *out = e->v.trials_per_level;
    return FLB_OK;
}

flb_status flb_ensemble_member(const flb_ensemble* e, int j, flb_clicks** out) {
    if (!e || !out) return invalid("null argument");
    if (j < 0 || j > e->v.grid_n) return invalid("grid index out of range");
    return guarded([&] {
        *out = new flb_clicks{e->v.statistics[static_cast<size_t>(j)]};
    });
}

flb_status flb_ensemble_merge(const flb_ensemble* e, const flb_pdt* pdt, flb_clicks** out) {
    if (!e || !pdt || !out) return invalid("null argument");
    return guarded([&] { *out = new flb_clicks{fadelab::merge_statistics(e->v, pdt->v)}; });
}

void flb_ensemble_free(flb_ensemble* e) { delete e; }

/* ---- analysis ---- */

flb_status flb_clicks_min_eigenvalue(const flb_clicks* c, int order, double* out) {
    if (!c || !out) return invalid("null argument");
    return guarded([&] {
        *out = fadelab::min_eigenvalue(fadelab::moment_vector_from_clicks(c->v), order);
    });
}

flb_status flb_atmospheric_moment(const flb_ensemble* e, const flb_pdt* pdt, int order,
                                  double* out) {
    if (!e || !pdt || !out) return invalid("null argument");
    return guarded([&] {
        *out = fadelab::atmospheric_moment(e->v.statistics, pdt->v, order);
    });
}

flb_status flb_atmospheric_run(const flb_ensemble* e, const flb_pdt* pdt,
                               const flb_analysis_options* opt, flb_result** out) {
    if (!e || !pdt || !opt || !out) return invalid("null argument");
    return guarded([&] {
        *out = new flb_result{fadelab::atmospheric_run(e->v, pdt->v, to_opt(*opt))};
    });
}

flb_status flb_constant_loss_sweep(const flb_ensemble* e, const flb_analysis_options* opt,
                                   flb_sweep** out) {
    if (!e || !opt || !out) return invalid("null argument");
    return guarded([&] {
        *out = new flb_sweep{fadelab::constant_loss_sweep(e->v, to_opt(*opt))};
    });
}

flb_status flb_postselection_sweep(const flb_ensemble* e, const flb_pdt* pdt,
                                   const flb_analysis_options* opt, const double* thresholds,
                                   size_t n_thresholds, flb_sweep** out) {
    if (!e || !pdt || !opt || !out || (!thresholds && n_thresholds > 0))
        return invalid("null argument");
    return guarded([&] {
        std::vector<double> t(thresholds, thresholds + n_thresholds);
        *out = new flb_sweep{fadelab::postselection_sweep(e->v, pdt->v, to_opt(*opt), t)};
    });
}

flb_status flb_rytov_sweep(const flb_ensemble* e, const double* rytov_sq,
                           const flb_model* const* models, size_t n_points,
                           const flb_analysis_options* opt, flb_sweep** out) {
    if (!e || !opt || !out || (n_points > 0 && (!rytov_sq || !models)))
        return invalid("null argument");
    return guarded([&] {
        if (n_points == 0) throw fadelab::ConfigError("rytov sweep: empty mapping");
        std::vector<double> grid(rytov_sq, rytov_sq + n_points);
        std::vector<fadelab::TransmittanceModel> mapped;
        mapped.reserve(n_points);
        for (size_t i = 0; i < n_points; ++i) {
            if (!models[i]) throw fadelab::ConfigError("rytov sweep: null model in mapping");
            mapped.push_back(models[i]->v);
        }
        auto mapping = [&grid, &mapped](double r) -> fadelab::TransmittanceModel {
            for (size_t i = 0; i < grid.size(); ++i)
                if (grid[i] == r) return mapped[i];
            throw fadelab::ConfigError("rytov sweep: no model for requested grid point");
        };
        *out = new flb_sweep{fadelab::rytov_sweep(e->v, mapping, to_opt(*opt), grid)};
    });
}

flb_status flb_beta_scan(const flb_ensemble* e, const flb_analysis_options* opt,
                         const double* alpha_grid, size_t n_alpha, const double* beta_grid,
                         size_t n_beta, flb_sweep** out) {
    if (!e || !opt || !out || !alpha_grid || !beta_grid) return invalid("null argument");
    return guarded([&] {
        std::vector<double> a(alpha_grid, alpha_grid + n_alpha);
        std::vector<double> b(beta_grid, beta_grid + n_beta);
        *out = new flb_sweep{fadelab::beta_scan(e->v, to_opt(*opt), a, b)};
    });
}

flb_status flb_result_values(const flb_result* r, double* e_min, double* delta_e,
                             double* significance) {
    if (!r) return invalid("null argument");
    if (e_min) *e_min = r->v.e_min;
    if (delta_e) *delta_e = r->v.delta_e;
    if (significance) *significance = r->v.significance;
    return FLB_OK;
}

flb_status flb_result_classification(const flb_result* r, double threshold,
                                     flb_classification* out) {
    if (!r || !out) return invalid("null argument");
    *out = to_c(fadelab::classify(r->v, threshold));
    return FLB_OK;
}

flb_status flb_result_to_json(const flb_result* r, double threshold, char** out) {
    if (!r || !out) return invalid("null argument");
    return guarded([&] { *out = dup_string(result_json(r->v, threshold).dump(2)); });
}

void flb_result_free(flb_result* r) { delete r; }

flb_status flb_sweep_size(const flb_sweep* s, size_t* out) {
    if (!s || !out) return invalid("null argument");
    *out = s->v.entries.size();
    return FLB_OK;
}

flb_status flb_sweep_entry(const flb_sweep* s, size_t index, double* params, size_t* n_params,
                           double* e_min, double* delta_e, double* significance,
                           flb_classification* cls, int* is_error) {
    if (!s) return invalid("null argument");
    if (index >= s->v.entries.size()) return invalid("sweep index out of range");
    const auto& e = s->v.entries[index];
    if (n_params) *n_params = e.params.size();
    if (params)
        for (size_t i = 0; i < e.params.size(); ++i) params[i] = e.params[i];
    if (is_error) *is_error = e.result ? 0 : 1;
    if (e.result) {
        if (e_min) *e_min = e.result->e_min;
        if (delta_e) *delta_e = e.result->delta_e;
        if (significance) *significance = e.result->significance;
        if (cls) *cls = to_c(e.classification);
    } else {
        if (e_min) *e_min = std::nan("");
        if (delta_e) *delta_e = std::nan("");
        if (significance) *significance = std::nan("");
        if (cls) *cls = FLB_INCONCLUSIVE;
    }
    return FLB_OK;
}

flb_status flb_sweep_entry_error(const flb_sweep* s, size_t index, char** out) {
    if (!s || !out) return invalid("null argument");
    if (index >= s->v.entries.size()) return invalid("sweep index out of range");
    *out = dup_string(s->v.entries[index].error);
    return FLB_OK;
}

flb_status flb_sweep_write_csv(const flb_sweep* s, const char* path,
                               const char* const* header_comments) {
    if (!s || !path) return invalid("null argument");
    return guarded([&] {
        std::vector<std::string> comments;
        if (header_comments)
            for (const char* const* p = header_comments; *p; ++p) comments.emplace_back(*p);
        fadelab::write_sweep_csv(s->v, std::string(path), comments);
    });
}

flb_status flb_sweep_to_json(const flb_sweep* s, char** out) {
    if (!s || !out) return invalid("null argument");
    return guarded([&] {
        json j;
        j["param_names"] = s->v.param_names;
        json entries = json::array();
        for (const auto& e : s->v.entries) {
            json je;
            je["params"] = e.params;
            if (e.result) {
                je["result"] = result_json(*e.result, 3.0);
                je["result"]["classification"] = fadelab::to_string(e.classification);
            } else {
                je["error"] = e.error;
            }
            entries.push_back(std::move(je));
        }
        j["entries"] = std::move(entries);
        *out = dup_string(j.dump(2));
    });
}

void flb_sweep_free(flb_sweep* s) { delete s; }

/* ---- calibration ---- */

flb_status flb_calibrate_source(double target_mean_clicks, const flb_detector_config* cfg,
                                int modes, double* squeeze_out) {
    if (!cfg || !squeeze_out) return invalid("null argument");
    return guarded([&] {
        *squeeze_out = fadelab::calibrate_source(target_mean_clicks, to_cfg(*cfg), modes);
    });
}

flb_status flb_calibrate_emitter_array(double target_mean_clicks,
                                       const flb_detector_config* cfg, int modes,
                                       double* emit_prob_out) {
    if (!cfg || !emit_prob_out) return invalid("null argument");
    return guarded([&] {
        *emit_prob_out =
            fadelab::calibrate_emitter_array(target_mean_clicks, to_cfg(*cfg), modes);
    });
}

} /* extern "C" */
