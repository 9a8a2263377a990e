#include "fadelab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "fadelab/errors.hpp"
#include "csv.hpp"

namespace fadelab {

namespace {

// Exact binomial coefficients for the small N of a multiplexed detector.
double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

std::vector<double> normalized_click_probs(std::vector<double> c, int n_bins) {
    double total = 0.0;
    for (double& v : c) {
        if (v < 0.0) {
            if (v < -1e-9) throw InternalError("click probability went negative");
            v = 0.0; // alternating-sum rounding
        }
        total += v;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw InternalError("click statistics failed to normalize");
    for (double& v : c) v /= total;
    (void)n_bins;
    return c;
}

} // namespace

void DetectorConfig::validate() const {
    if (n_bins < 1) throw ParameterError("detector: need at least one bin");
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ParameterError("detector: efficiency must lie in [0,1]");
    if (!(dark_click_rate >= 0.0) || !std::isfinite(dark_click_rate))
        throw ParameterError("detector: dark click rate must be finite and >= 0");
}

ClickStatistics::ClickStatistics(int n_bins, std::vector<double> probabilities)
    : n_bins_(n_bins) {
    if (n_bins < 1) throw ParameterError("ClickStatistics: need at least one bin");
    if (probabilities.size() != static_cast<std::size_t>(n_bins) + 1)
        throw ParameterError("ClickStatistics: need exactly N+1 probabilities");
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ParameterError("ClickStatistics: probabilities must be finite and >= 0");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw ParameterError("ClickStatistics: probabilities must sum to 1");
    for (double& p : probabilities) p /= total;
    c_ = std::move(probabilities);
}

ClickStatistics::ClickStatistics(int n_bins, std::vector<std::int64_t> counts)
    : n_bins_(n_bins) {
    if (n_bins < 1) throw ParameterError("ClickStatistics: need at least one bin");
    if (counts.size() != static_cast<std::size_t>(n_bins) + 1)
        throw ParameterError("ClickStatistics: need exactly N+1 counts");
    std::int64_t total = 0;
    for (std::int64_t k : counts) {
        if (k < 0) throw ParameterError("ClickStatistics: counts must be >= 0");
        total += k;
    }
    if (total < 1) throw EmptyInputError("ClickStatistics: need at least one trial");
    trials_ = total;
    c_.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        c_[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    counts_ = std::move(counts);
}

const std::vector<std::int64_t>& ClickStatistics::counts() const {
    if (!counts_) throw CountsRequiredError("ClickStatistics: no counts attached");
    return *counts_;
}

MomentVector analytic_moments(const PhotonNumberDistribution& pnd, const DetectorConfig& cfg) {
    cfg.validate();
    const int N = cfg.n_bins;
    MomentVector mv;
    mv.values.resize(static_cast<std::size_t>(N) + 1);
    const auto& p = pnd.probabilities();
    for (int l = 0; l <= N; ++l) {
        const double base = 1.0 - static_cast<double>(l) * cfg.efficiency / N;
        double s = 0.0;
        if (base == 0.0) {
            s = p[0];
        } else {
            // sum_n p_n base^n, evaluated backwards (Horner) for stability
            for (std::size_t n = p.size(); n-- > 0;) s = s * base + p[n];
        }
        mv.values[static_cast<std::size_t>(l)] =
            std::exp(-static_cast<double>(l) * cfg.dark_click_rate) * s;
    }
    // The truncated tail never contributes negatively; value(0) is the total
    // retained mass, which we pin to 1 so downstream identities hold exactly.
    const double norm = mv.values[0];
    if (!(norm > 0.0)) throw InternalError("analytic moments lost all mass");
    for (double& v : mv.values) v /= norm;
    return mv;
}

ClickStatistics click_statistics(const PhotonNumberDistribution& pnd, const DetectorConfig& cfg) {
    const MomentVector mv = analytic_moments(pnd, cfg);
    const int N = cfg.n_bins;
    std::vector<double> c(static_cast<std::size_t>(N) + 1, 0.0);
    for (int k = 0; k <= N; ++k) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) {
            const double term = choose(k, j) * mv[N - k + j];
            acc += (j % 2 == 0) ? term : -term;
        }
        c[static_cast<std::size_t>(k)] = choose(N, k) * acc;
    }
    return ClickStatistics(N, normalized_click_probs(std::move(c), N));
}

double moments_from_clicks(const ClickStatistics& cs, int l) {
    const int N = cs.n_bins();
    if (l < 0 || l > N) throw DomainError("moments_from_clicks: order must lie in [0, N]");
    const double denom = choose(N, l);
    double s = 0.0;
    for (int k = 0; k <= N - l; ++k)
        s += choose(N - k, l) / denom * cs.probability(k);
    return s;
}

MomentVector moment_vector_from_clicks(const ClickStatistics& cs) {
    MomentVector mv;
    mv.values.resize(static_cast<std::size_t>(cs.n_bins()) + 1);
    for (int l = 0; l <= cs.n_bins(); ++l)
        mv.values[static_cast<std::size_t>(l)] = moments_from_clicks(cs, l);
    return mv;
}

double mean_clicks(const ClickStatistics& cs) {
    double m = 0.0;
    for (int k = 1; k <= cs.n_bins(); ++k)
        m += static_cast<double>(k) * cs.probability(k);
    return m;
}

ClickStatistics sample_clicks(const ClickStatistics& cs, std::int64_t trials,
                              std::uint64_t seed) {
    if (trials < 1) throw EmptyInputError("sample_clicks: need at least one trial");
    Rng rng(derive_seed(seed, {0x636c69636b73ULL}));
    std::vector<std::int64_t> counts(cs.probabilities().size(), 0);
    sample_multinomial(rng, trials, cs.probabilities(), counts);
    return ClickStatistics(cs.n_bins(), std::move(counts));
}

namespace {

void monte_carlo_shard(const CategoricalSampler& photon_sampler, const DetectorConfig& cfg,
                       std::int64_t trials, std::uint64_t shard_seed,
                       std::vector<std::int64_t>& counts) {
    Rng rng(shard_seed);
    const int N = cfg.n_bins;
    const double dark_p = -std::expm1(-cfg.dark_click_rate); // 1 - e^{-dark}
    std::vector<char> fired(static_cast<std::size_t>(N));
    for (std::int64_t t = 0; t < trials; ++t) {
        std::fill(fired.begin(), fired.end(), 0);
        const auto n_photons = static_cast<std::int64_t>(photon_sampler.sample(rng));
        for (std::int64_t i = 0; i < n_photons; ++i) {
            if (!rng.bernoulli(cfg.efficiency)) continue;
            fired[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(N)))] = 1;
        }
        if (dark_p > 0.0)
            for (int b = 0; b < N; ++b)
                if (rng.bernoulli(dark_p)) fired[static_cast<std::size_t>(b)] = 1;
        int clicks = 0;
        for (char f : fired) clicks += f;
        ++counts[static_cast<std::size_t>(clicks)];
    }
}

} // namespace

ClickStatistics monte_carlo_clicks(const PhotonNumberDistribution& pnd, const DetectorConfig& cfg,
                                   std::int64_t trials, std::uint64_t seed, int threads) {
    cfg.validate();
    if (trials < 1) throw EmptyInputError("monte_carlo_clicks: need at least one trial");
    if (threads < 1) threads = 1;
    const CategoricalSampler photon_sampler(pnd.probabilities());

    // Fixed shard layout independent of the thread count.
    const int n_shards = 64;
    const std::int64_t per_shard = trials / n_shards;
    std::vector<std::vector<std::int64_t>> shard_counts(
        n_shards, std::vector<std::int64_t>(static_cast<std::size_t>(cfg.n_bins) + 1, 0));

    auto run_shard = [&](int s) {
        std::int64_t shard_trials = per_shard + (s < trials % n_shards ? 1 : 0);
        if (shard_trials == 0) return;
        monte_carlo_shard(photon_sampler, cfg, shard_trials,
                          derive_seed(seed, {0x6d635f636c6bULL, static_cast<std::uint64_t>(s)}),
                          shard_counts[static_cast<std::size_t>(s)]);
    };

    if (threads == 1) {
        for (int s = 0; s < n_shards; ++s) run_shard(s);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int workers = std::min(threads, n_shards);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const int s = next.fetch_add(1);
                    if (s >= n_shards) return;
                    run_shard(s);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::vector<std::int64_t> counts(static_cast<std::size_t>(cfg.n_bins) + 1, 0);
    for (const auto& sc : shard_counts)
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += sc[i];
    return ClickStatistics(cfg.n_bins, std::move(counts));
}

void write_clicks_csv(const ClickStatistics& cs, const ClickCsvMetadata& meta,
                      std::ostream& out) {
    out << "# fadelab clicks v1\n";
    out << "# N=" << meta.n_bins << '\n';
    out << "# M=" << meta.trials << '\n';
    if (meta.grid_index >= 0) out << "# j=" << meta.grid_index << '\n';
    if (meta.grid_n >= 0) out << "# n=" << meta.grid_n << '\n';
    if (meta.eta >= 0.0) out << "# eta=" << detail::format_double(meta.eta) << '\n';
    if (!meta.label.empty()) out << "# label=" << meta.label << '\n';
    out << "k,count,probability\n";
    for (int k = 0; k <= cs.n_bins(); ++k) {
        const std::int64_t count = cs.has_counts() ? cs.counts()[static_cast<std::size_t>(k)] : 0;
        out << k << ',' << count << ',' << detail::format_double(cs.probability(k)) << '\n';
    }
}

void write_clicks_csv(const ClickStatistics& cs, const ClickCsvMetadata& meta,
                      const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_clicks_csv(cs, meta, f);
    if (!f.good()) throw IoError("failed writing '" + path + "'");
}

std::pair<ClickStatistics, ClickCsvMetadata> read_clicks_csv(std::istream& in,
                                                             const std::string& context) {
    ClickCsvMetadata meta;
    std::vector<std::int64_t> counts;
    std::vector<double> probs;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_eol(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            const std::string value = line.substr(eq + 1);
            if (key == "N") meta.n_bins = static_cast<int>(detail::parse_int(value, context, lineno));
            else if (key == "M") meta.trials = detail::parse_int(value, context, lineno);
            else if (key == "j") meta.grid_index = static_cast<int>(detail::parse_int(value, context, lineno));
            else if (key == "n") meta.grid_n = static_cast<int>(detail::parse_int(value, context, lineno));
            else if (key == "eta") meta.eta = detail::parse_double(value, context, lineno);
            else if (key == "label") meta.label = value;
            continue;
        }
        if (!header_seen) {
            if (line != "k,count,probability")
                throw SchemaError(context + ":" + std::to_string(lineno) +
                                  ": expected header 'k,count,probability'");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3)
            throw SchemaError(context + ":" + std::to_string(lineno) + ": expected 3 fields");
        const auto k = detail::parse_int(fields[0], context, lineno);
        if (k != static_cast<std::int64_t>(counts.size()))
            throw SchemaError(context + ":" + std::to_string(lineno) + ": rows must list k = 0..N in order");
        counts.push_back(detail::parse_int(fields[1], context, lineno));
        probs.push_back(detail::parse_double(fields[2], context, lineno));
    }
    if (!header_seen) throw SchemaError(context + ": missing 'k,count,probability' header");
    if (meta.n_bins <= 0) throw SchemaError(context + ": missing or invalid '# N=' metadata");
    if (counts.size() != static_cast<std::size_t>(meta.n_bins) + 1)
        throw SchemaError(context + ": expected N+1 = " + std::to_string(meta.n_bins + 1) +
                          " data rows");
    if (meta.trials > 0) {
        std::int64_t total = 0;
        for (std::int64_t c : counts) total += c;
        if (total != meta.trials)
            throw SchemaError(context + ": counts sum to " + std::to_string(total) +
                              " but '# M=' says " + std::to_string(meta.trials));
        return {ClickStatistics(meta.n_bins, std::move(counts)), meta};
    }
    return {ClickStatistics(meta.n_bins, std::move(probs)), meta};
}

std::pair<ClickStatistics, ClickCsvMetadata> read_clicks_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    return read_clicks_csv(f, path);
}

} // namespace fadelab
