#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fadelab {

// Continuous probability distribution of the channel transmittance eta in
// [0,1]. Three families:
//   log_normal   -- strong-turbulence model, density
//                   P(eta) = exp(-(ln eta - mu)^2 / (2 sigma^2)) / (eta sigma sqrt(2 pi))
//   weibull_bw   -- beam-wandering model: the beam-center deflection r is
//                   Rayleigh(wander_variance) distributed and
//                   eta(r) = eta0 exp(-(r/scale)^shape), which makes
//                   eta log-negative-Weibull distributed on (0, eta0)
//   tabulated    -- piecewise-linear density through user-supplied
//                   (eta, value) nodes, zero outside the tabulated range
class TransmittanceModel {
public:
    enum class Family { log_normal, weibull_bw, tabulated };

    static TransmittanceModel log_normal(double mu, double sigma);
    // Convenience overload for configs quoting the variance sigma^2.
    static TransmittanceModel log_normal_var(double mu, double sigma_sq);
    static TransmittanceModel weibull_bw(double eta0, double shape, double scale,
                                         double wander_variance);
    static TransmittanceModel tabulated(std::vector<std::pair<double, double>> points);

    Family family() const { return family_; }

    // Density P(eta); zero outside [0,1]. Throws DomainError for eta
    // outside [0,1].
    double density(double eta) const;

    // Closed-form raw moment <eta^s> = exp(s mu + s^2 sigma^2 / 2).
    // Only the log-normal family has an in-closed-form moment; note the
    // formula integrates the density over (0, inf), i.e. it ignores the
    // physical truncation of the support to [0,1].
    double closed_moment(int s) const;

    // Raw moments <eta^s>, s = 1..3, of the density restricted to [0,1]
    // and renormalized there (adaptive quadrature).
    std::array<double, 3> truncated_raw_moments() const;

    double param(const std::string& name) const;
    std::string describe() const;

private:
    TransmittanceModel() = default;

    Family family_ = Family::log_normal;
    double mu_ = 0.0, sigma_ = 1.0;                            // log_normal
    double eta0_ = 1.0, shape_ = 2.0, scale_ = 1.0, wvar_ = 1.0; // weibull_bw
    std::vector<std::pair<double, double>> table_;              // tabulated
};

// Probability mass function over the equidistant transmittance grid
// eta_k = k/n for k = 0..n (both endpoints included).
class DiscretePdt {
public:
    // Normalizes the given nonnegative weights; throws DegenerateError if
    // they carry no mass, ParameterError on negative entries.
    DiscretePdt(int n, std::vector<double> weights);

    int n() const { return n_; }
    std::size_t size() const { return weights_.size(); }
    double eta(int k) const { return static_cast<double>(k) / n_; }
    double weight(int k) const { return weights_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& weights() const { return weights_; }

private:
    int n_;
    std::vector<double> weights_;
};

// Discretization of a continuous model on the n+1 point grid:
// w_k = P(eta_k) / sum_j P(eta_j).
DiscretePdt discretize(const TransmittanceModel& model, int n);

struct TransmittanceMoments {
    std::vector<double> raw; // raw[s] = sum_k w_k eta_k^s, s = 0..max_order
    double mean;
    double variance;
    std::optional<double> skewness; // undefined when variance == 0
};

TransmittanceMoments transmittance_moments(const DiscretePdt& pdt, int max_order);

// Relative errors |discrete - continuous| / |continuous| of the first three
// raw transmittance moments <eta^s>, s = 1..3. The primary reference is the
// density truncated to [0,1] and renormalized; for the log-normal family the
// untruncated closed-form reference is reported alongside.
struct DiscretizationErrors {
    std::array<double, 3> vs_truncated;
    std::optional<std::array<double, 3>> vs_closed_form;
};

DiscretizationErrors discretization_errors(const TransmittanceModel& model,
                                           const DiscretePdt& pdt);

// Drops all mass below eta_ps and renormalizes. Throws EmptySelectionError
// when nothing survives.
DiscretePdt post_select(const DiscretePdt& pdt, double eta_ps);

// Beta-binomial mass function on the grid:
// w_k = C(n,k) B(k+alpha, n-k+beta) / B(alpha, beta), evaluated in log space.
DiscretePdt beta_binomial(int n, double alpha, double beta);

// Histogram of transmittance samples on the nearest grid points.
DiscretePdt empirical_pdt(const std::vector<double>& samples, int n);

// Two-column CSV with header "eta,value"; shared by DiscretePdt weights and
// tabulated-model nodes.
void write_pdt_csv(const DiscretePdt& pdt, std::ostream& out);
void write_pdt_csv(const DiscretePdt& pdt, const std::string& path);
DiscretePdt read_pdt_csv(std::istream& in, const std::string& context = "<stream>");
DiscretePdt read_pdt_csv_file(const std::string& path);
TransmittanceModel read_tabulated_csv(std::istream& in, const std::string& context = "<stream>");
TransmittanceModel read_tabulated_csv_file(const std::string& path);

} // namespace fadelab
