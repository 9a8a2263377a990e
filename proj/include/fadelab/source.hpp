#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fadelab {

// Truncated photon-number distribution of a source state. The probabilities
// p_0..p_nmax carry all the information the phase-insensitive click detector
// can see; tail_bound() bounds the probability mass lost to truncation.
class PhotonNumberDistribution {
public:
    // nmax = kAutoNmax picks the smallest truncation certifying
    // tail_bound <= tail_tol; an explicit nmax must still satisfy the
    // tolerance or a TruncationError is thrown.
    static constexpr int kAutoNmax = -1;
    static constexpr double kDefaultTailTol = 1e-10;

    // Poisson statistics of a coherent state with the given mean.
    static PhotonNumberDistribution coherent(double mean_photons, int nmax = kAutoNmax,
                                             double tail_tol = kDefaultTailTol);

    // Single-mode squeezed vacuum: p_{2m} = (2m)!/(2^m m!)^2 tanh^{2m}(r)/cosh(r),
    // odd probabilities exactly zero, mean photon number sinh^2(r).
    static PhotonNumberDistribution squeezed_vacuum(double squeeze, int nmax = kAutoNmax,
                                                    double tail_tol = kDefaultTailTol);

    // Independent effective squeezer modes feeding one detector: the photon
    // statistics are the discrete convolution of the single-mode laws.
    static PhotonNumberDistribution multimode_squeezed(std::span<const double> squeezes,
                                                       int nmax = kAutoNmax,
                                                       double tail_tol = kDefaultTailTol);

    // Geometric (thermal) statistics, p_n = nbar^n / (1+nbar)^{n+1}.
    static PhotonNumberDistribution thermal(double mean_photons, int nmax = kAutoNmax,
                                            double tail_tol = kDefaultTailTol);

    // Number state |n>; exact, tail_bound = 0.
    static PhotonNumberDistribution fock(int n);

    // Array of `modes` independent single-photon emitters firing with
    // probability emit_prob each, i.e. binomial photon statistics. This is
    // the standard sub-binomial reference source for click counting.
    static PhotonNumberDistribution emitter_array(int modes, double emit_prob);

    static PhotonNumberDistribution from_probabilities(std::vector<double> p,
                                                       double tail_tol = kDefaultTailTol);

    int nmax() const { return static_cast<int>(p_.size()) - 1; }
    // Probability beyond the truncation is 0 by construction.
    double p(int n) const {
        return n > nmax() ? 0.0 : p_[static_cast<std::size_t>(n)];
    }
    const std::vector<double>& probabilities() const { return p_; }
    double tail_bound() const { return tail_bound_; }

    double mean_photon_number() const;

    std::string describe() const { return description_; }

    PhotonNumberDistribution with_description(std::string d) && {
        description_ = std::move(d);
        return std::move(*this);
    }

private:
    PhotonNumberDistribution(std::vector<double> p, double tail_bound, std::string description);

    std::vector<double> p_;
    double tail_bound_ = 0.0;
    std::string description_;
};

// Binomial (Bernoulli-per-photon) loss channel at the photon-statistics
// level: p'_m = sum_{n>=m} p_n C(n,m) eta^m (1-eta)^{n-m}. With eta fixed
// this is the deterministic special case of a fluctuating-loss channel.
PhotonNumberDistribution apply_loss(const PhotonNumberDistribution& pnd, double eta);

// Photon statistics of two independent sources hitting the same detector.
PhotonNumberDistribution convolve(const PhotonNumberDistribution& a,
                                  const PhotonNumberDistribution& b);

// CSV with header "n,p".
void write_pnd_csv(const PhotonNumberDistribution& pnd, std::ostream& out);
void write_pnd_csv(const PhotonNumberDistribution& pnd, const std::string& path);

} // namespace fadelab
