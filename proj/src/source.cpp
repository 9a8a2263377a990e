#include "fadelab/source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fadelab/errors.hpp"
#include "csv.hpp"

namespace fadelab {

namespace {

// Hard cap on automatic truncation; beyond this the state is too bright for
// the requested tail tolerance and the caller gets a TruncationError.
constexpr int kMaxAutoNmax = 8192;

// Accumulates terms of a nonnegative series until the tail tolerance is
// certified, then hands the built vector back. `next` returns p_n for the
// n it is called with (consecutive n starting at 0).
template <typename NextTerm>
std::vector<double> build_until_tail(NextTerm next, int nmax, double tail_tol,
                                     const char* what) {
    const bool automatic = nmax < 0;
    const int cap = automatic ? kMaxAutoNmax : nmax;
    std::vector<double> p;
    p.reserve(automatic ? 64 : static_cast<std::size_t>(cap) + 1);
    double cum = 0.0;
    for (int n = 0; n <= cap; ++n) {
        const double pn = next(n);
        p.push_back(pn);
        cum += pn;
        if (automatic && 1.0 - cum <= tail_tol) return p;
    }
    if (!automatic && 1.0 - cum <= tail_tol) return p;
    std::ostringstream os;
    os << what << ": truncation at nmax=" << cap << " leaves tail mass " << (1.0 - cum)
       << " above the tolerance " << tail_tol;
    throw TruncationError(os.str());
}

double tail_of(const std::vector<double>& p) {
    double cum = 0.0;
    for (double v : p) cum += v;
    return std::max(0.0, 1.0 - cum);
}

} // namespace

PhotonNumberDistribution::PhotonNumberDistribution(std::vector<double> p, double tail_bound,
                                                   std::string description)
    : p_(std::move(p)), tail_bound_(tail_bound), description_(std::move(description)) {}

PhotonNumberDistribution PhotonNumberDistribution::coherent(double mean_photons, int nmax,
                                                            double tail_tol) {
    if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons))
        throw ParameterError("coherent: mean photon number must be finite and >= 0");
    double term = std::exp(-mean_photons);
    auto next = [&, first = true](int n) mutable {
        if (first) {
            first = false;
            return term;
        }
        term *= mean_photons / n;
        return term;
    };
    auto p = build_until_tail(next, nmax, tail_tol, "coherent");
    const double tail = tail_of(p);
    std::ostringstream os;
    os << "coherent(mean=" << mean_photons << ")";
    return PhotonNumberDistribution(std::move(p), tail, os.str());
}

PhotonNumberDistribution PhotonNumberDistribution::squeezed_vacuum(double squeeze, int nmax,
                                                                   double tail_tol) {
    if (!(squeeze >= 0.0) || !std::isfinite(squeeze))
        throw ParameterError("squeezed_vacuum: squeeze parameter must be finite and >= 0");
    const double t2 = std::tanh(squeeze) * std::tanh(squeeze);
    double even_term = 1.0 / std::cosh(squeeze); // p_0
    auto next = [&](int n) {
        if (n == 0) return even_term;
        if (n % 2 == 1) return 0.0;
        // p_{2m}/p_{2m-2} = tanh^2(r) (2m-1)/(2m)
        even_term *= t2 * static_cast<double>(n - 1) / static_cast<double>(n);
        return even_term;
    };
    auto p = build_until_tail(next, nmax, tail_tol, "squeezed_vacuum");
    const double tail = tail_of(p);
    std::ostringstream os;
    os << "squeezed_vacuum(r=" << squeeze << ")";
    return PhotonNumberDistribution(std::move(p), tail, os.str());
}

PhotonNumberDistribution PhotonNumberDistribution::multimode_squeezed(
    std::span<const double> squeezes, int nmax, double tail_tol) {
    if (squeezes.empty())
        throw EmptyInputError("multimode_squeezed: need at least one mode");
    const double per_mode_tol = tail_tol / static_cast<double>(squeezes.size());
    PhotonNumberDistribution acc = squeezed_vacuum(squeezes[0], nmax, per_mode_tol);
    for (std::size_t i = 1; i < squeezes.size(); ++i)
        acc = convolve(acc, squeezed_vacuum(squeezes[i], nmax, per_mode_tol));
    std::ostringstream os;
    os << "multimode_squeezed(modes=" << squeezes.size() << ", r=[";
    for (std::size_t i = 0; i < squeezes.size(); ++i)
        os << (i ? "," : "") << squeezes[i];
    os << "])";
    return PhotonNumberDistribution(std::move(acc.p_), acc.tail_bound_, os.str());
}

PhotonNumberDistribution PhotonNumberDistribution::thermal(double mean_photons, int nmax,
                                                           double tail_tol) {
    if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons))
        throw ParameterError("thermal: mean photon number must be finite and >= 0");
    const double ratio = mean_photons / (1.0 + mean_photons);
    double term = 1.0 / (1.0 + mean_photons);
    auto next = [&, first = true](int) mutable {
        if (first) {
            first = false;
            return term;
        }
        term *= ratio;
        return term;
    };
    auto p = build_until_tail(next, nmax, tail_tol, "thermal");
    const double tail = tail_of(p);
    std::ostringstream os;
    os << "thermal(mean=" << mean_photons << ")";
    return PhotonNumberDistribution(std::move(p), tail, os.str());
}

PhotonNumberDistribution PhotonNumberDistribution::fock(int n) {
    if (n < 0) throw ParameterError("fock: photon number must be >= 0");
    std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
    p.back() = 1.0;
    std::ostringstream os;
    os << "fock(" << n << ")";
    return PhotonNumberDistribution(std::move(p), 0.0, os.str());
}

PhotonNumberDistribution PhotonNumberDistribution::emitter_array(int modes, double emit_prob) {
    if (modes < 1) throw ParameterError("emitter_array: need at least one emitter");
    if (!(emit_prob >= 0.0 && emit_prob <= 1.0))
        throw ParameterError("emitter_array: emission probability must lie in [0,1]");
    std::vector<double> p(static_cast<std::size_t>(modes) + 1);
    // Binomial pmf by symmetric recurrence from the mode.
    const double q = 1.0 - emit_prob;
    if (emit_prob == 1.0) {
        std::fill(p.begin(), p.end(), 0.0);
        p.back() = 1.0;
    } else if (emit_prob == 0.0) {
        std::fill(p.begin(), p.end(), 0.0);
        p.front() = 1.0;
    } else {
        double term = std::exp(static_cast<double>(modes) * std::log(q));
        const double odds = emit_prob / q;
        for (int k = 0; k <= modes; ++k) {
            p[static_cast<std::size_t>(k)] = term;
            term *= odds * static_cast<double>(modes - k) / static_cast<double>(k + 1);
        }
    }
    std::ostringstream os;
    os << "emitter_array(modes=" << modes << ", emit_prob=" << emit_prob << ")";
    return PhotonNumberDistribution(std::move(p), 0.0, os.str());
}

PhotonNumberDistribution PhotonNumberDistribution::from_probabilities(std::vector<double> p,
                                                                      double tail_tol) {
    if (p.empty()) throw EmptyInputError("from_probabilities: empty vector");
    double cum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ParameterError("from_probabilities: probabilities must be finite and >= 0");
        cum += v;
    }
    if (cum > 1.0 + 1e-9)
        throw ParameterError("from_probabilities: probabilities sum above 1");
    const double tail = std::max(0.0, 1.0 - cum);
    if (tail > tail_tol)
        throw TruncationError("from_probabilities: missing tail mass exceeds the tolerance");
    return PhotonNumberDistribution(std::move(p), tail, "custom");
}

double PhotonNumberDistribution::mean_photon_number() const {
    double m = 0.0;
    for (int n = 1; n <= nmax(); ++n) m += static_cast<double>(n) * p_[static_cast<std::size_t>(n)];
    return m;
}

PhotonNumberDistribution apply_loss(const PhotonNumberDistribution& pnd, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("apply_loss: eta must lie in [0,1]");
    const auto& p = pnd.probabilities();
    if (eta == 1.0) return pnd;
    std::vector<double> out(p.size(), 0.0);
    if (eta == 0.0) {
        double mass = 0.0;
        for (double v : p) mass += v;
        out[0] = mass;
    } else {
        const double log_eta = std::log(eta);
        const double log_q = std::log1p(-eta);
        for (std::size_t n = 0; n < p.size(); ++n) {
            const double pn = p[n];
            if (pn == 0.0) continue;
            if (n == 0) {
                out[0] += pn;
                continue;
            }
            // Binomial row B(m; n, eta), built outward from the mode so large
            // n does not underflow at the edges.
            const double nd = static_cast<double>(n);
            const auto mode = static_cast<std::size_t>((nd + 1.0) * eta);
            const std::size_t m0 = std::min(mode, n);
            const double md = static_cast<double>(m0);
            const double log_b0 = std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) -
                                  std::lgamma(nd - md + 1.0) + md * log_eta +
                                  (nd - md) * log_q;
            const double b0 = std::exp(log_b0);
            double b = b0;
            for (std::size_t m = m0;; ++m) { // upward from the mode
                out[m] += pn * b;
                if (m == n || b == 0.0) break;
                b *= eta / (1.0 - eta) * (nd - static_cast<double>(m)) /
                     (static_cast<double>(m) + 1.0);
            }
            b = b0;
            for (std::size_t m = m0; m > 0;) { // downward from the mode
                b *= (1.0 - eta) / eta * static_cast<double>(m) /
                     (nd - static_cast<double>(m) + 1.0);
                --m;
                out[m] += pn * b;
                if (b == 0.0) break;
            }
        }
    }
    std::ostringstream os;
    os << pnd.describe() << " after loss(eta=" << eta << ")";
    return PhotonNumberDistribution::from_probabilities(std::move(out),
                                                        pnd.tail_bound() + 1e-12)
        .with_description(os.str());
}

PhotonNumberDistribution convolve(const PhotonNumberDistribution& a,
                                  const PhotonNumberDistribution& b) {
    const auto& pa = a.probabilities();
    const auto& pb = b.probabilities();
    std::vector<double> out(pa.size() + pb.size() - 1, 0.0);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i] == 0.0) continue;
        for (std::size_t j = 0; j < pb.size(); ++j) out[i + j] += pa[i] * pb[j];
    }
    std::ostringstream os;
    os << a.describe() << " * " << b.describe();
    return PhotonNumberDistribution::from_probabilities(std::move(out),
                                                        a.tail_bound() + b.tail_bound() + 1e-12)
        .with_description(os.str());
}

void write_pnd_csv(const PhotonNumberDistribution& pnd, std::ostream& out) {
    out << "n,p\n";
    for (int n = 0; n <= pnd.nmax(); ++n)
        out << n << ',' << detail::format_double(pnd.p(n)) << '\n';
}

void write_pnd_csv(const PhotonNumberDistribution& pnd, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_pnd_csv(pnd, f);
    if (!f.good()) throw IoError("failed writing '" + path + "'");
}

} // namespace fadelab
