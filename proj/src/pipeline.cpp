#include "fadelab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "fadelab/errors.hpp"
#include "csv.hpp"

namespace fs = std::filesystem;

namespace fadelab {

void ChannelEnsemble::validate() const {
    if (grid_n < 1) throw IncompleteEnsembleError("ensemble: grid resolution n must be >= 1");
    if (statistics.size() != static_cast<std::size_t>(grid_n) + 1)
        throw IncompleteEnsembleError("ensemble: expected n+1 = " + std::to_string(grid_n + 1) +
                                      " attenuation levels, have " +
                                      std::to_string(statistics.size()));
    for (std::size_t j = 0; j < statistics.size(); ++j) {
        if (statistics[j].n_bins() != detector.n_bins)
            throw SchemaError("ensemble: member at eta=" +
                              detail::format_double(static_cast<double>(j) / grid_n) +
                              " has N=" + std::to_string(statistics[j].n_bins()) +
                              ", detector says N=" + std::to_string(detector.n_bins));
        if (trials_per_level > 0) {
            if (!statistics[j].has_counts() || statistics[j].trials() != trials_per_level)
                throw SchemaError("ensemble: member at eta=" +
                                  detail::format_double(static_cast<double>(j) / grid_n) +
                                  " does not carry the common trial budget M=" +
                                  std::to_string(trials_per_level));
        }
    }
}

ChannelEnsemble build_ensemble(const PhotonNumberDistribution& source, const DetectorConfig& cfg,
                               int grid_n, const SamplingMode& mode, int threads) {
    cfg.validate();
    if (grid_n < 1) throw ParameterError("build_ensemble: grid resolution n must be >= 1");
    if (mode.trials < 0) throw ParameterError("build_ensemble: negative trial budget");
    if (threads < 1) threads = 1;

    std::vector<std::optional<ClickStatistics>> slots(static_cast<std::size_t>(grid_n) + 1);
    auto run_level = [&](int j) {
        const double eta = static_cast<double>(j) / grid_n;
        ClickStatistics analytic = click_statistics(apply_loss(source, eta), cfg);
        if (mode.trials > 0) {
            const std::uint64_t level_seed =
                derive_seed(mode.seed, {0x656e73ULL, static_cast<std::uint64_t>(j)});
            slots[static_cast<std::size_t>(j)] = sample_clicks(analytic, mode.trials, level_seed);
        } else {
            slots[static_cast<std::size_t>(j)] = std::move(analytic);
        }
    };

    if (threads == 1 || grid_n == 0) {
        for (int j = 0; j <= grid_n; ++j) run_level(j);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min(threads, grid_n + 1);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const int j = next.fetch_add(1);
                    if (j > grid_n) return;
                    run_level(j);
                }
            });
        for (auto& th : pool) th.join();
    }

    ChannelEnsemble ens;
    ens.grid_n = grid_n;
    ens.detector = cfg;
    ens.statistics.reserve(slots.size());
    for (auto& s : slots) ens.statistics.push_back(std::move(*s));
    ens.provenance = ChannelEnsemble::Provenance::simulated;
    ens.trials_per_level = mode.trials;
    ens.seed = mode.seed;
    ens.validate();
    return ens;
}

ClickStatistics merge_statistics(const ChannelEnsemble& ensemble, const DiscretePdt& pdt) {
    ensemble.validate();
    if (pdt.size() != ensemble.statistics.size())
        throw IncompleteEnsembleError(
            "merge_statistics: pdt grid (n=" + std::to_string(pdt.n()) +
            ") does not match the ensemble grid (n=" + std::to_string(ensemble.grid_n) + ")");
    const int N = ensemble.detector.n_bins;
    std::vector<double> merged(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::size_t j = 0; j < ensemble.statistics.size(); ++j) {
        const double w = pdt.weight(static_cast<int>(j));
        if (w == 0.0) continue;
        for (int k = 0; k <= N; ++k)
            merged[static_cast<std::size_t>(k)] += w * ensemble.statistics[j].probability(k);
    }
    return ClickStatistics(N, std::move(merged));
}

namespace {

DiscretePdt point_mass(int grid_n, int j) {
    std::vector<double> w(static_cast<std::size_t>(grid_n) + 1, 0.0);
    w[static_cast<std::size_t>(j)] = 1.0;
    return DiscretePdt(grid_n, std::move(w));
}

NonclassicalityResult run_channel(const ChannelEnsemble& ensemble, const DiscretePdt& pdt,
                                  const AnalysisOptions& opt, std::uint64_t seed_tag) {
    NonclassicalityResult r;
    if (ensemble.has_counts()) {
        r = bootstrap_error(ensemble.statistics, pdt, opt.order, opt.bootstrap_resamples,
                            derive_seed(opt.seed, {seed_tag}), opt.threads);
    } else {
        r = analytic_result(ensemble.statistics, pdt, opt.order);
    }
    return r;
}

} // namespace

NonclassicalityResult atmospheric_run(const ChannelEnsemble& ensemble, const DiscretePdt& pdt,
                                      const AnalysisOptions& opt) {
    ensemble.validate();
    if (pdt.size() != ensemble.statistics.size())
        throw IncompleteEnsembleError(
            "atmospheric_run: pdt grid does not match the ensemble grid");
    NonclassicalityResult r = run_channel(ensemble, pdt, opt, 0x61746d6fULL);
    r.channel = "atmospheric";
    return r;
}

SweepResult constant_loss_sweep(const ChannelEnsemble& ensemble, const AnalysisOptions& opt) {
    ensemble.validate();
    SweepResult sweep;
    sweep.param_names = {"eta"};
    for (int j = 0; j <= ensemble.grid_n; ++j) {
        SweepEntry entry;
        entry.params = {ensemble.eta(j)};
        NonclassicalityResult r = run_channel(ensemble, point_mass(ensemble.grid_n, j), opt,
                                              0x636f6e73ULL + static_cast<std::uint64_t>(j));
        std::ostringstream ch;
        ch << "constant-loss eta=" << detail::format_double(ensemble.eta(j));
        r.channel = ch.str();
        entry.classification = classify(r, opt.threshold);
        entry.result = std::move(r);
        sweep.entries.push_back(std::move(entry));
    }
    return sweep;
}

SweepResult postselection_sweep(const ChannelEnsemble& ensemble, const DiscretePdt& pdt,
                                const AnalysisOptions& opt,
                                const std::vector<double>& thresholds) {
    ensemble.validate();
    SweepResult sweep;
    sweep.param_names = {"eta_ps"};
    std::uint64_t tag = 0x7073ULL;
    for (double eta_ps : thresholds) {
        SweepEntry entry;
        entry.params = {eta_ps};
        try {
            const DiscretePdt selected = post_select(pdt, eta_ps);
            NonclassicalityResult r = run_channel(ensemble, selected, opt, ++tag);
            std::ostringstream ch;
            ch << "post-selected eta_ps=" << detail::format_double(eta_ps);
            r.channel = ch.str();
            entry.classification = classify(r, opt.threshold);
            entry.result = std::move(r);
        } catch (const Error& e) {
            ++tag;
            entry.error = e.what();
        }
        sweep.entries.push_back(std::move(entry));
    }
    return sweep;
}

SweepResult rytov_sweep(const ChannelEnsemble& ensemble, const RytovMapping& mapping,
                        const AnalysisOptions& opt, const std::vector<double>& rytov_grid) {
    ensemble.validate();
    if (!mapping)
        throw ConfigError("rytov_sweep: no Rytov-to-model mapping configured");
    SweepResult sweep;
    sweep.param_names = {"rytov_sq"};
    std::uint64_t tag = 0x7279ULL;
    for (double rytov_sq : rytov_grid) {
        SweepEntry entry;
        entry.params = {rytov_sq};
        try {
            const TransmittanceModel model = mapping(rytov_sq);
            const DiscretePdt pdt = discretize(model, ensemble.grid_n);
            NonclassicalityResult r = run_channel(ensemble, pdt, opt, ++tag);
            std::ostringstream ch;
            ch << "rytov_sq=" << detail::format_double(rytov_sq) << " via " << model.describe();
            r.channel = ch.str();
            entry.classification = classify(r, opt.threshold);
            entry.result = std::move(r);
        } catch (const Error& e) {
            ++tag;
            entry.error = e.what();
        }
        sweep.entries.push_back(std::move(entry));
    }
    return sweep;
}

SweepResult beta_scan(const ChannelEnsemble& ensemble, const AnalysisOptions& opt,
                      const std::vector<double>& alpha_grid,
                      const std::vector<double>& beta_grid) {
    ensemble.validate();
    if (alpha_grid.empty() || beta_grid.empty())
        throw ParameterError("beta_scan: parameter grids must be nonempty");
    SweepResult sweep;
    sweep.param_names = {"alpha", "beta"};
    std::uint64_t tag = 0x6262ULL;
    for (double alpha : alpha_grid) {
        for (double beta : beta_grid) {
            SweepEntry entry;
            entry.params = {alpha, beta};
            try {
                const DiscretePdt pdt = beta_binomial(ensemble.grid_n, alpha, beta);
                NonclassicalityResult r = run_channel(ensemble, pdt, opt, ++tag);
                std::ostringstream ch;
                ch << "beta_binomial(alpha=" << detail::format_double(alpha)
                   << ", beta=" << detail::format_double(beta) << ")";
                r.channel = ch.str();
                entry.classification = classify(r, opt.threshold);
                entry.result = std::move(r);
            } catch (const Error& e) {
                ++tag;
                entry.error = e.what();
            }
            sweep.entries.push_back(std::move(entry));
        }
    }
    return sweep;
}

namespace {

double calibrate_scalar(const std::function<double(double)>& mean_clicks_of, double target,
                        double hi_limit, const char* what) {
    // Deterministic bisection on a bracketed interval; the observable is
    // monotone in the brightness parameter.
    double lo = 0.0;
    double f_lo = mean_clicks_of(lo) - target;
    if (std::fabs(f_lo) <= 1e-6) return lo;
    if (f_lo > 0.0) throw InternalError(std::string(what) + ": observable at zero exceeds target");
    double hi = hi_limit > 1.0 ? 0.5 : hi_limit * 0.5;
    for (;;) {
        hi = std::min(hi * 2.0, hi_limit);
        double f_hi;
        try {
            f_hi = mean_clicks_of(hi) - target;
        } catch (const TruncationError&) {
            throw ParameterError(std::string(what) +
                                 ": target mean click number is not reachable (state too bright "
                                 "for the certified truncation)");
        }
        if (f_hi >= 0.0) break;
        if (hi >= hi_limit)
            throw ParameterError(std::string(what) + ": target mean click number not reachable");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = mean_clicks_of(mid) - target;
        if (std::fabs(f_mid) <= 1e-6) return mid;
        if (f_mid < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double calibrate_source(double target_mean_clicks, const DetectorConfig& cfg, int modes) {
    cfg.validate();
    if (modes < 1) throw ParameterError("calibrate_source: need at least one mode");
    if (!(target_mean_clicks >= 0.0))
        throw ParameterError("calibrate_source: target must be >= 0");
    if (target_mean_clicks >= static_cast<double>(cfg.n_bins))
        throw ParameterError("calibrate_source: target mean clicks must be below N");
    if (target_mean_clicks == 0.0) return 0.0;
    auto observable = [&](double r) {
        std::vector<double> rs(static_cast<std::size_t>(modes), r);
        return mean_clicks(click_statistics(PhotonNumberDistribution::multimode_squeezed(rs), cfg));
    };
    return calibrate_scalar(observable, target_mean_clicks, 8.0, "calibrate_source");
}

double calibrate_emitter_array(double target_mean_clicks, const DetectorConfig& cfg, int modes) {
    cfg.validate();
    if (modes < 1) throw ParameterError("calibrate_emitter_array: need at least one emitter");
    if (!(target_mean_clicks >= 0.0))
        throw ParameterError("calibrate_emitter_array: target must be >= 0");
    if (target_mean_clicks >= static_cast<double>(cfg.n_bins))
        throw ParameterError("calibrate_emitter_array: target mean clicks must be below N");
    if (target_mean_clicks == 0.0) return 0.0;
    auto observable = [&](double b) {
        return mean_clicks(click_statistics(PhotonNumberDistribution::emitter_array(modes, b), cfg));
    };
    // Check the fully-on array can reach the target before bisecting.
    if (observable(1.0) < target_mean_clicks)
        throw ParameterError("calibrate_emitter_array: target mean clicks not reachable with " +
                             std::to_string(modes) + " emitters");
    return calibrate_scalar(observable, target_mean_clicks, 1.0, "calibrate_emitter_array");
}

void export_ensemble(const ChannelEnsemble& ensemble, const std::string& directory) {
    ensemble.validate();
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoError("cannot create directory '" + directory + "': " + ec.message());
    for (int j = 0; j <= ensemble.grid_n; ++j) {
        ClickCsvMetadata meta;
        meta.n_bins = ensemble.detector.n_bins;
        meta.trials = ensemble.trials_per_level;
        meta.grid_index = j;
        meta.grid_n = ensemble.grid_n;
        meta.eta = ensemble.eta(j);
        char name[32];
        std::snprintf(name, sizeof(name), "clicks_j%04d.csv", j);
        write_clicks_csv(ensemble.statistics[static_cast<std::size_t>(j)], meta,
                         (fs::path(directory) / name).string());
    }
}

ChannelEnsemble ingest_ensemble(const std::string& directory) {
    if (!fs::is_directory(directory))
        throw IoError("'" + directory + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(directory))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IncompleteEnsembleError("no click CSV files in '" + directory + "'");

    std::map<int, ClickStatistics> by_index;
    int grid_n = -1;
    int n_bins = -1;
    std::int64_t trials = -1;
    for (const auto& file : files) {
        auto [cs, meta] = read_clicks_csv_file(file);
        if (meta.grid_index < 0 || meta.grid_n < 1)
            throw SchemaError(file + ": missing '# j=' / '# n=' grid metadata");
        if (grid_n < 0) grid_n = meta.grid_n;
        if (meta.grid_n != grid_n)
            throw SchemaError(file + ": grid n=" + std::to_string(meta.grid_n) +
                              " disagrees with n=" + std::to_string(grid_n) + " seen earlier");
        if (meta.grid_index > grid_n)
            throw SchemaError(file + ": grid index j=" + std::to_string(meta.grid_index) +
                              " exceeds n=" + std::to_string(grid_n));
        const double expected_eta = static_cast<double>(meta.grid_index) / grid_n;
        if (meta.eta >= 0.0 && std::fabs(meta.eta - expected_eta) > 1e-9)
            throw SchemaError(file + ": eta=" + detail::format_double(meta.eta) +
                              " is not j/n for j=" + std::to_string(meta.grid_index));
        if (n_bins < 0) n_bins = cs.n_bins();
        if (cs.n_bins() != n_bins)
            throw SchemaError(file + ": N=" + std::to_string(cs.n_bins()) +
                              " disagrees with N=" + std::to_string(n_bins) + " seen earlier");
        const std::int64_t m = cs.has_counts() ? cs.trials() : 0;
        if (trials < 0) trials = m;
        if (m != trials)
            throw SchemaError(file + ": trial budget M=" + std::to_string(m) +
                              " differs from M=" + std::to_string(trials) +
                              " of the other levels; runs are not comparable");
        if (!by_index.emplace(meta.grid_index, std::move(cs)).second)
            throw SchemaError(file + ": duplicate grid index j=" +
                              std::to_string(meta.grid_index));
    }
    for (int j = 0; j <= grid_n; ++j)
        if (!by_index.count(j))
            throw IncompleteEnsembleError(
                "missing attenuation level eta=" +
                detail::format_double(static_cast<double>(j) / grid_n) + " (j=" +
                std::to_string(j) + " of n=" + std::to_string(grid_n) + ")");

    ChannelEnsemble ens;
    ens.grid_n = grid_n;
    ens.detector.n_bins = n_bins;
    for (auto& [j, cs] : by_index) ens.statistics.push_back(std::move(cs));
    ens.provenance = ChannelEnsemble::Provenance::ingested;
    ens.trials_per_level = trials;
    ens.validate();
    return ens;
}

namespace {

std::string classification_field(const SweepEntry& e) {
    if (!e.result) {
        std::string msg = e.error;
        for (char& c : msg)
            if (c == ',' || c == '\n') c = ';';
        return "ERROR:" + msg;
    }
    return to_string(e.classification);
}

} // namespace

void write_sweep_csv(const SweepResult& sweep, std::ostream& out,
                     const std::vector<std::string>& header_comments) {
    for (const auto& line : header_comments) out << "# " << line << '\n';
    for (const auto& name : sweep.param_names) out << name << ',';
    out << "e_min,delta_e,significance,classification\n";
    for (const auto& e : sweep.entries) {
        for (double p : e.params) out << detail::format_double(p) << ',';
        if (e.result) {
            out << detail::format_double(e.result->e_min) << ','
                << detail::format_double(e.result->delta_e) << ','
                << detail::format_double(e.result->significance) << ','
                << classification_field(e) << '\n';
        } else {
            out << "nan,nan,nan," << classification_field(e) << '\n';
        }
    }
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path,
                     const std::vector<std::string>& header_comments) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_sweep_csv(sweep, f, header_comments);
    if (!f.good()) throw IoError("failed writing '" + path + "'");
}

} // namespace fadelab
