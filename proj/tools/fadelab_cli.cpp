// Batch front end for the fadelab shared library: experiment configuration,
// channel simulation, data ingestion, nonclassicality analysis, sweeps.
// Talks to the core exclusively through the C API in fadelab/fadelab.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <fadelab/fadelab.h>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 2 configuration/parameter error, 3 incomplete
// ensemble, 4 ingestion/schema error.
struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& msg) { throw CliError{code, msg}; }

int exit_code_of(flb_status s, bool ingesting) {
    switch (s) {
    case FLB_ERR_INCOMPLETE_ENSEMBLE: return 3;
    case FLB_ERR_SCHEMA: return 4;
    case FLB_ERR_IO: return ingesting ? 4 : 2;
    default: return 2;
    }
}

void check(flb_status s, bool ingesting = false) {
    if (s != FLB_OK) fail(exit_code_of(s, ingesting), flb_last_error());
}

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
using ModelPtr = std::unique_ptr<flb_model, HandleDeleter<flb_model, flb_model_free>>;
using PdtPtr = std::unique_ptr<flb_pdt, HandleDeleter<flb_pdt, flb_pdt_free>>;
using PndPtr = std::unique_ptr<flb_pnd, HandleDeleter<flb_pnd, flb_pnd_free>>;
using ClicksPtr = std::unique_ptr<flb_clicks, HandleDeleter<flb_clicks, flb_clicks_free>>;
using EnsemblePtr =
    std::unique_ptr<flb_ensemble, HandleDeleter<flb_ensemble, flb_ensemble_free>>;
using ResultPtr = std::unique_ptr<flb_result, HandleDeleter<flb_result, flb_result_free>>;
using SweepPtr = std::unique_ptr<flb_sweep, HandleDeleter<flb_sweep, flb_sweep_free>>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    flb_string_free(s);
    return out;
}

// ---- configuration ---------------------------------------------------------

const char* const kConfigKeysHelp =
    "Config file keys (JSON):\n"
    "  seed                       integer; required whenever sampling happens\n"
    "  threads                    worker threads (0 = all cores); results do not depend on it\n"
    "  output_dir                 default directory for outputs\n"
    "  source.family              coherent | squeezed | multimode_squeezed | thermal |\n"
    "                             fock | emitter_array\n"
    "  source.mean_photons        coherent/thermal brightness\n"
    "  source.squeeze             squeezed: squeeze parameter r\n"
    "  source.squeezes            multimode_squeezed: list of r values\n"
    "  source.photons             fock: photon number\n"
    "  source.modes               emitter_array/multimode_squeezed(+calibration): mode count\n"
    "  source.emit_prob           emitter_array: per-emitter emission probability\n"
    "  source.calibrate_to_mean_clicks\n"
    "                             root-find the brightness so the detector sees this mean\n"
    "                             click number at full transmission\n"
    "  source.background_thermal_mean\n"
    "                             optional thermal admixture (extra broadband light)\n"
    "  detector.n_bins            N (default 8)\n"
    "  detector.efficiency        overall efficiency (default 0.22)\n"
    "  detector.dark_click_rate   mean dark exposure per bin per pulse (default 0)\n"
    "  channel.grid_n             attenuation grid resolution n (levels eta_j = j/n)\n"
    "  channel.data_dir           ingest measured click CSVs instead of simulating\n"
    "  channel.pdt.family         log_normal | weibull_bw | beta_binomial | tabulated |\n"
    "                             point_mass | pdt_csv\n"
    "  channel.pdt.mu/.sigma/.sigma_sq         log_normal parameters\n"
    "  channel.pdt.eta0/.shape/.scale/.wander_variance   weibull_bw parameters\n"
    "  channel.pdt.alpha/.beta    beta_binomial parameters\n"
    "  channel.pdt.csv            tabulated density / pdt weights CSV path\n"
    "  channel.pdt.eta            point_mass location\n"
    "  analysis.K                 matrix-of-moments order (even, <= N; default 8)\n"
    "  analysis.bootstrap         bootstrap resamples B (default 1000)\n"
    "  analysis.threshold         significance threshold (default 3)\n"
    "  analysis.M                 pulses per attenuation level (0 = analytic)\n"
    "  analysis.postselect_thresholds   list of eta_PS values (default 0,0.01,...,0.99)\n"
    "  analysis.alpha_grid / .beta_grid list of beta-binomial parameters\n"
    "                             (default log-spaced over [0.1, 20])\n"
    "  analysis.rytov_mapping     list of {rytov_sq, eta0, shape, scale, wander_variance}\n"
    "                             or {rytov_sq, csv} entries\n"
    "Flags override file values.\n";

void require_keys(const json& j, const std::string& where,
                  const std::vector<std::string>& allowed) {
    if (!j.is_object()) fail(2, "config: '" + where + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) fail(2, "config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
    }
}

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(2, "cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const std::exception& e) {
        fail(2, std::string("config parse error: ") + e.what());
    }
    require_keys(j, "", {"seed", "threads", "output_dir", "source", "detector", "channel",
                         "analysis"});
    if (j.contains("source"))
        require_keys(j["source"], "source",
                     {"family", "mean_photons", "squeeze", "squeezes", "photons", "modes",
                      "emit_prob", "calibrate_to_mean_clicks", "background_thermal_mean"});
    if (j.contains("detector"))
        require_keys(j["detector"], "detector", {"n_bins", "efficiency", "dark_click_rate"});
    if (j.contains("channel")) {
        require_keys(j["channel"], "channel", {"grid_n", "data_dir", "pdt"});
        if (j["channel"].contains("pdt"))
            require_keys(j["channel"]["pdt"], "channel.pdt",
                         {"family", "mu", "sigma", "sigma_sq", "eta0", "shape", "scale",
                          "wander_variance", "alpha", "beta", "csv", "eta"});
    }
    if (j.contains("analysis")) {
        require_keys(j["analysis"], "analysis",
                     {"K", "bootstrap", "threshold", "M", "postselect_thresholds", "alpha_grid",
                      "beta_grid", "rytov_mapping"});
        if (j["analysis"].contains("rytov_mapping")) {
            if (!j["analysis"]["rytov_mapping"].is_array())
                fail(2, "config: analysis.rytov_mapping must be an array");
            for (const auto& e : j["analysis"]["rytov_mapping"])
                require_keys(e, "analysis.rytov_mapping[]",
                             {"rytov_sq", "eta0", "shape", "scale", "wander_variance", "csv"});
        }
    }
    return j;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception&) {
        fail(2, "config: key '" + key + "' has the wrong type");
    }
}

double get_num(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) fail(2, "config: missing '" + where + "." + key + "'");
    if (!j.at(key).is_number()) fail(2, "config: '" + where + "." + key + "' must be a number");
    return j.at(key).get<double>();
}

// FNV-1a over the canonically serialized effective config.
std::string config_digest(const json& effective) {
    const std::string s = nlohmann::json(effective).dump(); // sorted keys
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

struct RunContext {
    json config;
    std::string digest;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    std::string output_dir;

    int resolved_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
    void require_seed(const char* why) const {
        if (!seed_given)
            fail(2, std::string("config: 'seed' is required when ") + why);
    }
};

RunContext make_context(const json& config) {
    RunContext ctx;
    ctx.config = config;
    ctx.digest = config_digest(config);
    ctx.seed_given = config.contains("seed");
    if (ctx.seed_given) {
        if (!config["seed"].is_number_integer())
            fail(2, "config: 'seed' must be an integer");
        ctx.seed = config["seed"].get<std::uint64_t>();
    }
    ctx.threads = get_or<int>(config, "threads", 0);
    ctx.output_dir = get_or<std::string>(config, "output_dir", ".");
    return ctx;
}

flb_detector_config detector_of(const json& config) {
    flb_detector_config cfg{8, 0.22, 0.0};
    if (config.contains("detector")) {
        const json& d = config["detector"];
        cfg.n_bins = get_or<int>(d, "n_bins", cfg.n_bins);
        cfg.efficiency = get_or<double>(d, "efficiency", cfg.efficiency);
        cfg.dark_click_rate = get_or<double>(d, "dark_click_rate", cfg.dark_click_rate);
    }
    return cfg;
}

PndPtr build_source(const json& config, const flb_detector_config& det) {
    if (!config.contains("source")) fail(2, "config: missing 'source' section");
    const json& s = config["source"];
    const auto family = get_or<std::string>(s, "family", "");
    if (family.empty()) fail(2, "config: missing 'source.family'");

    const bool calibrated = s.contains("calibrate_to_mean_clicks");
    const double target = calibrated ? get_num(s, "calibrate_to_mean_clicks", "source") : 0.0;

    flb_pnd* raw = nullptr;
    if (family == "coherent") {
        check(flb_pnd_coherent(get_num(s, "mean_photons", "source"), -1, &raw));
    } else if (family == "thermal") {
        check(flb_pnd_thermal(get_num(s, "mean_photons", "source"), -1, &raw));
    } else if (family == "squeezed") {
        double r = calibrated ? 0.0 : get_num(s, "squeeze", "source");
        if (calibrated) check(flb_calibrate_source(target, &det, 1, &r));
        check(flb_pnd_squeezed_vacuum(r, -1, &raw));
    } else if (family == "multimode_squeezed") {
        std::vector<double> rs;
        if (calibrated) {
            const int modes = get_or<int>(s, "modes", 1);
            double r = 0.0;
            check(flb_calibrate_source(target, &det, modes, &r));
            rs.assign(static_cast<std::size_t>(modes), r);
        } else {
            if (!s.contains("squeezes") || !s["squeezes"].is_array())
                fail(2, "config: 'source.squeezes' must be a list for multimode_squeezed");
            for (const auto& v : s["squeezes"]) rs.push_back(v.get<double>());
        }
        check(flb_pnd_multimode_squeezed(rs.data(), rs.size(), -1, &raw));
    } else if (family == "fock") {
        check(flb_pnd_fock(static_cast<int>(get_num(s, "photons", "source")), &raw));
    } else if (family == "emitter_array") {
        const int modes = get_or<int>(s, "modes", 0);
        if (modes < 1) fail(2, "config: 'source.modes' must be >= 1 for emitter_array");
        double b = calibrated ? 0.0 : get_num(s, "emit_prob", "source");
        if (calibrated) {
            // Calibrate against the full source including any background, so
            // the observable is the actual operating point.
            const double bg = get_or<double>(s, "background_thermal_mean", 0.0);
            if (bg > 0.0) {
                // Bisection over emit_prob with the background folded in.
                double lo = 0.0, hi = 1.0;
                for (int i = 0; i < 90; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    flb_pnd *em = nullptr, *th = nullptr, *both = nullptr;
                    flb_clicks* c = nullptr;
                    check(flb_pnd_emitter_array(modes, mid, &em));
                    check(flb_pnd_thermal(bg, -1, &th));
                    check(flb_pnd_convolve(em, th, &both));
                    check(flb_clicks_from_pnd(both, &det, &c));
                    double mean = 0.0;
                    check(flb_clicks_mean(c, &mean));
                    flb_clicks_free(c);
                    flb_pnd_free(em);
                    flb_pnd_free(th);
                    flb_pnd_free(both);
                    if (mean < target)
                        lo = mid;
                    else
                        hi = mid;
                }
                if (hi >= 1.0 - 1e-12)
                    fail(2, "config: calibration target not reachable with this emitter array");
                b = 0.5 * (lo + hi);
            } else {
                check(flb_calibrate_emitter_array(target, &det, modes, &b));
            }
        }
        check(flb_pnd_emitter_array(modes, b, &raw));
    } else {
        fail(2, "config: unknown source family '" + family + "'");
    }
    PndPtr pnd(raw);

    const double bg = get_or<double>(s, "background_thermal_mean", 0.0);
    if (bg > 0.0) {
        flb_pnd* th = nullptr;
        check(flb_pnd_thermal(bg, -1, &th));
        PndPtr thermal(th);
        flb_pnd* combined = nullptr;
        check(flb_pnd_convolve(pnd.get(), thermal.get(), &combined));
        pnd.reset(combined);
    }
    return pnd;
}

ModelPtr build_model(const json& p) {
    const auto family = get_or<std::string>(p, "family", "");
    flb_model* m = nullptr;
    if (family == "log_normal") {
        if (p.contains("sigma") && p.contains("sigma_sq"))
            fail(2, "config: give either channel.pdt.sigma or .sigma_sq, not both");
        if (p.contains("sigma_sq"))
            check(flb_model_log_normal_var(get_num(p, "mu", "channel.pdt"),
                                           get_num(p, "sigma_sq", "channel.pdt"), &m));
        else
            check(flb_model_log_normal(get_num(p, "mu", "channel.pdt"),
                                       get_num(p, "sigma", "channel.pdt"), &m));
    } else if (family == "weibull_bw") {
        check(flb_model_weibull_bw(get_num(p, "eta0", "channel.pdt"),
                                   get_num(p, "shape", "channel.pdt"),
                                   get_num(p, "scale", "channel.pdt"),
                                   get_num(p, "wander_variance", "channel.pdt"), &m));
    } else if (family == "tabulated") {
        const auto path = get_or<std::string>(p, "csv", "");
        if (path.empty()) fail(2, "config: tabulated pdt needs 'channel.pdt.csv'");
        check(flb_model_tabulated_csv(path.c_str(), &m));
    } else {
        fail(2, "config: unknown model family '" + family + "'");
    }
    return ModelPtr(m);
}

PdtPtr build_pdt(const json& config, int grid_n) {
    if (!config.contains("channel") || !config["channel"].contains("pdt"))
        fail(2, "config: missing 'channel.pdt' section");
    const json& p = config["channel"]["pdt"];
    const auto family = get_or<std::string>(p, "family", "");
    flb_pdt* out = nullptr;
    if (family == "beta_binomial") {
        check(flb_pdt_beta_binomial(grid_n, get_num(p, "alpha", "channel.pdt"),
                                    get_num(p, "beta", "channel.pdt"), &out));
    } else if (family == "point_mass") {
        const double eta = get_num(p, "eta", "channel.pdt");
        const int j = static_cast<int>(std::llround(eta * grid_n));
        if (j < 0 || j > grid_n || std::fabs(eta - static_cast<double>(j) / grid_n) > 1e-9)
            fail(2, "config: point_mass eta must sit on the grid j/n");
        std::vector<double> w(static_cast<std::size_t>(grid_n) + 1, 0.0);
        w[static_cast<std::size_t>(j)] = 1.0;
        check(flb_pdt_from_weights(grid_n, w.data(), &out));
    } else if (family == "pdt_csv") {
        const auto path = get_or<std::string>(p, "csv", "");
        if (path.empty()) fail(2, "config: pdt_csv needs 'channel.pdt.csv'");
        check(flb_pdt_read_csv(path.c_str(), &out));
        int n = 0;
        check(flb_pdt_grid_n(out, &n));
        if (n != grid_n) {
            flb_pdt_free(out);
            fail(2, "config: pdt CSV grid n=" + std::to_string(n) +
                        " does not match the ensemble grid n=" + std::to_string(grid_n));
        }
    } else {
        ModelPtr m = build_model(p);
        check(flb_pdt_discretize(m.get(), grid_n, &out));
    }
    return PdtPtr(out);
}

struct EnsembleSetup {
    EnsemblePtr ensemble;
    bool ingested = false;
    std::int64_t trials = 0;
};

EnsembleSetup make_ensemble(const RunContext& ctx) {
    const json& config = ctx.config;
    EnsembleSetup setup;
    const json channel = config.contains("channel") ? config["channel"] : json::object();
    if (channel.contains("data_dir")) {
        const auto dir = channel["data_dir"].get<std::string>();
        flb_ensemble* e = nullptr;
        const flb_status s = flb_ensemble_ingest(dir.c_str(), &e);
        if (s != FLB_OK) fail(exit_code_of(s, true), flb_last_error());
        setup.ensemble.reset(e);
        setup.ingested = true;
        std::int64_t m = 0;
        check(flb_ensemble_trials(setup.ensemble.get(), &m));
        setup.trials = m;
        return setup;
    }
    const int grid_n = get_or<int>(channel, "grid_n", 100);
    const flb_detector_config det = detector_of(config);
    const json analysis = config.contains("analysis") ? config["analysis"] : json::object();
    const std::int64_t trials = get_or<std::int64_t>(analysis, "M", 0);
    if (trials > 0) ctx.require_seed("analysis.M requests sampled statistics");
    PndPtr source = build_source(config, det);
    flb_ensemble* e = nullptr;
    check(flb_ensemble_build(source.get(), &det, grid_n, trials, ctx.seed,
                             ctx.resolved_threads(), &e));
    setup.ensemble.reset(e);
    setup.trials = trials;
    return setup;
}

flb_analysis_options analysis_options(const RunContext& ctx) {
    const json analysis =
        ctx.config.contains("analysis") ? ctx.config["analysis"] : json::object();
    flb_analysis_options opt{};
    opt.order = get_or<int>(analysis, "K", 8);
    opt.bootstrap_resamples = get_or<int>(analysis, "bootstrap", 1000);
    opt.seed = ctx.seed;
    opt.threads = ctx.resolved_threads();
    opt.threshold = get_or<double>(analysis, "threshold", 3.0);
    return opt;
}

std::vector<std::string> provenance_lines(const RunContext& ctx, const std::string& kind) {
    std::ostringstream seed;
    seed << ctx.seed;
    return {"fadelab " + std::string(flb_version()), "kind=" + kind, "config=" + ctx.digest,
            "seed=" + (ctx.seed_given ? seed.str() : std::string("none"))};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(2, "cannot open '" + path + "' for writing");
    f << text;
    if (!f.good()) fail(2, "failed writing '" + path + "'");
}

json provenance_json(const RunContext& ctx, const std::string& kind) {
    json j;
    j["tool"] = "fadelab";
    j["version"] = flb_version();
    j["kind"] = kind;
    j["config_digest"] = ctx.digest;
    if (ctx.seed_given) j["seed"] = ctx.seed;
    j["config"] = ctx.config;
    return j;
}

// ---- subcommands -------------------------------------------------------------

int cmd_discretize(const RunContext& ctx, const std::string& output) {
    const json& config = ctx.config;
    if (!config.contains("channel") || !config["channel"].contains("pdt"))
        fail(2, "config: discretize needs 'channel.pdt'");
    const int grid_n = get_or<int>(config["channel"], "grid_n", 100);
    if (grid_n < 1) fail(2, "config: channel.grid_n must be >= 1");
    ModelPtr model = build_model(config["channel"]["pdt"]);
    flb_pdt* raw = nullptr;
    check(flb_pdt_discretize(model.get(), grid_n, &raw));
    PdtPtr pdt(raw);
    check(flb_pdt_write_csv(pdt.get(), output.c_str()));

    double err[3], closed[3];
    check(flb_pdt_discretization_errors(model.get(), pdt.get(), err, closed));
    std::printf("wrote %s (n=%d)\n", output.c_str(), grid_n);
    std::printf("relative moment errors vs [0,1]-truncated reference: "
                "%.6g %.6g %.6g\n",
                err[0], err[1], err[2]);
    if (std::isfinite(closed[0]))
        std::printf("relative moment errors vs untruncated closed form:  "
                    "%.6g %.6g %.6g\n",
                    closed[0], closed[1], closed[2]);
    return 0;
}

int cmd_calibrate(const RunContext& ctx) {
    const json& config = ctx.config;
    if (!config.contains("source")) fail(2, "config: calibrate needs a 'source' section");
    const json& s = config["source"];
    if (!s.contains("calibrate_to_mean_clicks"))
        fail(2, "config: calibrate needs 'source.calibrate_to_mean_clicks'");
    const double target = get_num(s, "calibrate_to_mean_clicks", "source");
    const flb_detector_config det = detector_of(config);
    const auto family = get_or<std::string>(s, "family", "");
    const int modes = get_or<int>(s, "modes", 1);
    json out;
    out["family"] = family;
    out["target_mean_clicks"] = target;
    out["modes"] = modes;
    if (family == "squeezed" || family == "multimode_squeezed") {
        double r = 0.0;
        check(flb_calibrate_source(target, &det, modes, &r));
        out["squeeze_per_mode"] = r;
        std::printf("calibrated squeeze r=%.12g per mode (%d mode%s) for %.6g mean clicks\n", r,
                    modes, modes == 1 ? "" : "s", target);
    } else if (family == "emitter_array") {
        double b = 0.0;
        check(flb_calibrate_emitter_array(target, &det, modes, &b));
        out["emit_prob"] = b;
        std::printf("calibrated emit_prob=%.12g (%d emitters) for %.6g mean clicks\n", b, modes,
                    target);
    } else {
        fail(2, "config: calibrate supports squeezed, multimode_squeezed and emitter_array");
    }
    // Verify the operating point through the full source builder.
    PndPtr pnd = build_source(config, det);
    flb_clicks* c = nullptr;
    check(flb_clicks_from_pnd(pnd.get(), &det, &c));
    ClicksPtr clicks(c);
    double mean = 0.0;
    check(flb_clicks_mean(clicks.get(), &mean));
    out["achieved_mean_clicks"] = mean;
    std::printf("achieved mean clicks at eta=1: %.9g\n", mean);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_simulate(const RunContext& ctx, const std::string& out_dir) {
    EnsembleSetup setup = make_ensemble(ctx);
    check(flb_ensemble_export(setup.ensemble.get(), out_dir.c_str()));
    int n = 0;
    check(flb_ensemble_grid_n(setup.ensemble.get(), &n));
    std::printf("exported ensemble: %d attenuation levels (n=%d), M=%" PRId64 " -> %s\n", n + 1,
                n, setup.trials, out_dir.c_str());
    json manifest = provenance_json(ctx, "simulate");
    manifest["grid_n"] = n;
    manifest["M"] = setup.trials;
    write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

int cmd_analyze(const RunContext& ctx, const std::string& out_path) {
    EnsembleSetup setup = make_ensemble(ctx);
    if (setup.trials > 0 && !setup.ingested) ctx.require_seed("bootstrapping sampled data");
    if (setup.ingested && setup.trials > 0)
        ctx.require_seed("bootstrapping ingested counts");
    int grid_n = 0;
    check(flb_ensemble_grid_n(setup.ensemble.get(), &grid_n));
    PdtPtr pdt = build_pdt(ctx.config, grid_n);
    const flb_analysis_options opt = analysis_options(ctx);
    flb_result* raw = nullptr;
    check(flb_atmospheric_run(setup.ensemble.get(), pdt.get(), &opt, &raw));
    ResultPtr result(raw);

    double e_min = 0, delta_e = 0, significance = 0;
    check(flb_result_values(result.get(), &e_min, &delta_e, &significance));
    flb_classification cls;
    check(flb_result_classification(result.get(), opt.threshold, &cls));
    const char* verdict = cls == FLB_NONCLASSICAL         ? "NONCLASSICAL"
                          : cls == FLB_CONSISTENT_CLASSICAL ? "CONSISTENT_CLASSICAL"
                                                            : "INCONCLUSIVE";
    std::printf("e_min(K=%d) = %.9g, delta_e = %.3g, significance = %.4g -> %s\n", opt.order,
                e_min, delta_e, significance, verdict);

    json bundle = provenance_json(ctx, "analyze");
    char* result_str = nullptr;
    check(flb_result_to_json(result.get(), opt.threshold, &result_str));
    bundle["result"] = json::parse(take_string(result_str));
    write_text_file(out_path, bundle.dump(2) + "\n");
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_sweep(const RunContext& ctx, const std::string& kind, const std::string& out_dir) {
    EnsembleSetup setup = make_ensemble(ctx);
    if (setup.trials > 0) ctx.require_seed("bootstrapping sampled data");
    int grid_n = 0;
    check(flb_ensemble_grid_n(setup.ensemble.get(), &grid_n));
    const flb_analysis_options opt = analysis_options(ctx);
    const json analysis =
        ctx.config.contains("analysis") ? ctx.config["analysis"] : json::object();

    flb_sweep* raw = nullptr;
    if (kind == "constant-loss") {
        check(flb_constant_loss_sweep(setup.ensemble.get(), &opt, &raw));
    } else if (kind == "postselect") {
        PdtPtr pdt = build_pdt(ctx.config, grid_n);
        std::vector<double> thresholds;
        if (analysis.contains("postselect_thresholds")) {
            for (const auto& v : analysis["postselect_thresholds"])
                thresholds.push_back(v.get<double>());
        } else {
            for (int i = 0; i < 100; ++i) thresholds.push_back(0.01 * i);
        }
        check(flb_postselection_sweep(setup.ensemble.get(), pdt.get(), &opt, thresholds.data(),
                                      thresholds.size(), &raw));
    } else if (kind == "rytov") {
        if (!analysis.contains("rytov_mapping"))
            fail(2, "config: sweep --kind rytov needs 'analysis.rytov_mapping'");
        std::vector<double> grid;
        std::vector<ModelPtr> models;
        std::vector<const flb_model*> model_ptrs;
        for (const auto& entry : analysis["rytov_mapping"]) {
            grid.push_back(get_num(entry, "rytov_sq", "analysis.rytov_mapping[]"));
            if (entry.contains("csv")) {
                flb_model* m = nullptr;
                check(flb_model_tabulated_csv(
                    entry["csv"].get<std::string>().c_str(), &m));
                models.emplace_back(m);
            } else {
                flb_model* m = nullptr;
                check(flb_model_weibull_bw(
                    get_num(entry, "eta0", "analysis.rytov_mapping[]"),
                    get_num(entry, "shape", "analysis.rytov_mapping[]"),
                    get_num(entry, "scale", "analysis.rytov_mapping[]"),
                    get_num(entry, "wander_variance", "analysis.rytov_mapping[]"), &m));
                models.emplace_back(m);
            }
            model_ptrs.push_back(models.back().get());
        }
        check(flb_rytov_sweep(setup.ensemble.get(), grid.data(), model_ptrs.data(), grid.size(),
                              &opt, &raw));
    } else if (kind == "beta-scan") {
        auto grid_from = [&](const char* key) {
            std::vector<double> g;
            if (analysis.contains(key)) {
                for (const auto& v : analysis[key]) g.push_back(v.get<double>());
            } else {
                // log-spaced over [0.1, 20]
                const int points = 13;
                for (int i = 0; i < points; ++i)
                    g.push_back(0.1 * std::pow(200.0, static_cast<double>(i) / (points - 1)));
            }
            return g;
        };
        const auto alpha = grid_from("alpha_grid");
        const auto beta = grid_from("beta_grid");
        check(flb_beta_scan(setup.ensemble.get(), &opt, alpha.data(), alpha.size(), beta.data(),
                            beta.size(), &raw));
    } else {
        fail(2, "unknown sweep kind '" + kind +
                    "' (expected constant-loss | postselect | rytov | beta-scan)");
    }
    SweepPtr sweep(raw);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(2, "cannot create '" + out_dir + "': " + ec.message());
    const std::string stem = "sweep_" + kind;
    const std::string csv_path = (fs::path(out_dir) / (stem + ".csv")).string();
    const auto lines = provenance_lines(ctx, kind);
    std::vector<const char*> comment_ptrs;
    for (const auto& l : lines) comment_ptrs.push_back(l.c_str());
    comment_ptrs.push_back(nullptr);
    check(flb_sweep_write_csv(sweep.get(), csv_path.c_str(), comment_ptrs.data()));

    char* sweep_json = nullptr;
    check(flb_sweep_to_json(sweep.get(), &sweep_json));
    json bundle = provenance_json(ctx, "sweep:" + kind);
    bundle["sweep"] = json::parse(take_string(sweep_json));
    const std::string json_path = (fs::path(out_dir) / (stem + ".json")).string();
    write_text_file(json_path, bundle.dump(2) + "\n");

    // Summary table.
    size_t n_entries = 0;
    check(flb_sweep_size(sweep.get(), &n_entries));
    std::printf("%-24s %-14s %-10s %-12s %s\n", "params", "e_min", "delta_e", "significance",
                "classification");
    for (size_t i = 0; i < n_entries; ++i) {
        double params[2] = {0, 0};
        size_t n_params = 0;
        double e_min, delta_e, significance;
        flb_classification cls;
        int is_error = 0;
        check(flb_sweep_entry(sweep.get(), i, params, &n_params, &e_min, &delta_e, &significance,
                              &cls, &is_error));
        std::ostringstream ps;
        for (size_t p = 0; p < n_params; ++p) ps << (p ? "," : "") << params[p];
        if (is_error) {
            char* msg = nullptr;
            check(flb_sweep_entry_error(sweep.get(), i, &msg));
            std::printf("%-24s %s\n", ps.str().c_str(),
                        ("ERROR: " + take_string(msg)).c_str());
        } else {
            const char* cname = cls == FLB_NONCLASSICAL         ? "NONCLASSICAL"
                                : cls == FLB_CONSISTENT_CLASSICAL ? "CONSISTENT_CLASSICAL"
                                                                  : "INCONCLUSIVE";
            std::printf("%-24s %-14.6g %-10.3g %-12.5g %s\n", ps.str().c_str(), e_min, delta_e,
                        significance, cname);
        }
    }
    std::printf("wrote %s and %s\n", csv_path.c_str(), json_path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fadelab: desk-scale emulation of fluctuating-loss optical channels\n"
                 "from fixed-attenuation click-counting data"};
    app.footer(kConfigKeysHelp);
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    std::string out_dir;
    std::string kind;
    int threads_flag = -1;
    std::int64_t seed_flag = -1;
    bool seed_flag_given = false;
    std::int64_t m_flag = -1;
    int k_flag = -1;
    int n_flag = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file")->required();
        cmd->add_option("--threads", threads_flag, "worker threads (0 = all cores)");
        cmd->add_option("--seed", seed_flag, "root seed (overrides config)")
            ->each([&](const std::string&) { seed_flag_given = true; });
        cmd->add_option("--M", m_flag, "pulses per attenuation level (overrides analysis.M)");
        cmd->add_option("--K", k_flag, "matrix-of-moments order (overrides analysis.K)");
        cmd->add_option("--n", n_flag, "attenuation grid resolution (overrides channel.grid_n)");
    };

    CLI::App* discretize =
        app.add_subcommand("discretize", "discretize a transmittance model and report the "
                                         "moment errors of the discretization");
    add_common(discretize);
    discretize->add_option("--output", output, "output CSV path")->required();

    CLI::App* simulate =
        app.add_subcommand("simulate", "build a constant-loss ensemble and export it as "
                                       "per-attenuation click CSVs");
    add_common(simulate);
    simulate->add_option("--out-dir", out_dir, "export directory")->required();

    CLI::App* analyze = app.add_subcommand(
        "analyze", "merge an ensemble under a transmittance distribution and test "
                   "nonclassicality (result JSON + verdict line)");
    add_common(analyze);
    analyze->add_option("--output", output, "result JSON path")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep and write plot-ready "
                                                  "CSV/JSON");
    add_common(sweep);
    sweep->add_option("--kind", kind, "constant-loss | postselect | rytov | beta-scan")
        ->required();
    sweep->add_option("--out-dir", out_dir, "output directory");

    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "root-find the source brightness for a target mean click number");
    add_common(calibrate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        json config = load_config(config_path);
        // Flags win over file values.
        if (threads_flag >= 0) config["threads"] = threads_flag;
        if (seed_flag_given) config["seed"] = seed_flag;
        if (m_flag >= 0) config["analysis"]["M"] = m_flag;
        if (k_flag >= 0) config["analysis"]["K"] = k_flag;
        if (n_flag >= 0) config["channel"]["grid_n"] = n_flag;
        const RunContext ctx = make_context(config);

        if (discretize->parsed()) return cmd_discretize(ctx, output);
        if (simulate->parsed()) return cmd_simulate(ctx, out_dir);
        if (analyze->parsed()) return cmd_analyze(ctx, output);
        if (sweep->parsed())
            return cmd_sweep(ctx, kind, out_dir.empty() ? ctx.output_dir : out_dir);
        if (calibrate->parsed()) return cmd_calibrate(ctx);
        std::fprintf(stderr, "no subcommand\n");
        return 2;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
