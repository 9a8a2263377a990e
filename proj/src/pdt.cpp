#include "fadelab/pdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "fadelab/errors.hpp"
#include "csv.hpp"
#include "quadrature.hpp"

namespace fadelab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_eta_domain(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw DomainError("transmittance must lie in [0,1]");
}

} // namespace

TransmittanceModel TransmittanceModel::log_normal(double mu, double sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma <= 0.0)
        throw ParameterError("log_normal: need finite mu and sigma > 0");
    TransmittanceModel m;
    m.family_ = Family::log_normal;
    m.mu_ = mu;
    m.sigma_ = sigma;
    return m;
}

TransmittanceModel TransmittanceModel::log_normal_var(double mu, double sigma_sq) {
    if (!(sigma_sq > 0.0)) throw ParameterError("log_normal: need sigma^2 > 0");
    return log_normal(mu, std::sqrt(sigma_sq));
}

TransmittanceModel TransmittanceModel::weibull_bw(double eta0, double shape, double scale,
                                                  double wander_variance) {
    if (!(eta0 > 0.0 && eta0 <= 1.0))
        throw ParameterError("weibull_bw: need eta0 in (0,1]");
    if (!(shape > 0.0) || !(scale > 0.0) || !(wander_variance > 0.0))
        throw ParameterError("weibull_bw: need shape, scale, wander_variance > 0");
    TransmittanceModel m;
    m.family_ = Family::weibull_bw;
    m.eta0_ = eta0;
    m.shape_ = shape;
    m.scale_ = scale;
    m.wvar_ = wander_variance;
    return m;
}

TransmittanceModel TransmittanceModel::tabulated(std::vector<std::pair<double, double>> points) {
    if (points.empty()) throw ParameterError("tabulated: need at least one (eta, density) node");
    std::sort(points.begin(), points.end());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& [eta, value] = points[i];
        if (!(eta >= 0.0 && eta <= 1.0))
            throw ParameterError("tabulated: node abscissa outside [0,1]");
        if (!(value >= 0.0) || !std::isfinite(value))
            throw ParameterError("tabulated: density values must be finite and >= 0");
        if (i > 0 && points[i - 1].first == eta)
            throw ParameterError("tabulated: duplicate node abscissa");
    }
    TransmittanceModel m;
    m.family_ = Family::tabulated;
    m.table_ = std::move(points);
    return m;
}

double TransmittanceModel::density(double eta) const {
    check_eta_domain(eta);
    switch (family_) {
    case Family::log_normal: {
        if (eta == 0.0) return 0.0;
        const double z = (std::log(eta) - mu_) / sigma_;
        return std::exp(-0.5 * z * z) / (eta * sigma_ * std::sqrt(kTwoPi));
    }
    case Family::weibull_bw: {
        // eta = eta0 exp(-(r/scale)^shape) with r Rayleigh(wvar) distributed.
        if (eta == 0.0 || eta >= eta0_) {
            if (eta == eta0_) {
                // Limit at the top of the support: finite for shape == 2,
                // zero for shape < 2, divergent (integrable) above.
                if (shape_ == 2.0) return scale_ * scale_ / (2.0 * wvar_ * eta0_);
                if (shape_ < 2.0) return 0.0;
                return std::numeric_limits<double>::infinity();
            }
            return 0.0;
        }
        const double w = std::log(eta0_ / eta);
        const double r2 = scale_ * scale_;
        const double t = std::pow(w, 2.0 / shape_);
        return r2 / (wvar_ * shape_ * eta) * std::pow(w, 2.0 / shape_ - 1.0) *
               std::exp(-0.5 * r2 * t / wvar_);
    }
    case Family::tabulated: {
        const auto it = std::lower_bound(
            table_.begin(), table_.end(), eta,
            [](const std::pair<double, double>& p, double x) { return p.first < x; });
        if (it != table_.end() && it->first == eta) return it->second; // exact node
        if (it == table_.begin() || it == table_.end()) return 0.0;    // outside range
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double t = (eta - lo.first) / (hi.first - lo.first);
        return lo.second + t * (hi.second - lo.second);
    }
    }
    throw InternalError("unknown transmittance family");
}

double TransmittanceModel::closed_moment(int s) const {
    if (family_ != Family::log_normal)
        throw NotAvailableError("closed-form transmittance moments exist only for the log-normal family");
    if (s < 1) throw DomainError("closed_moment: order must be a positive integer");
    const double sd = static_cast<double>(s);
    return std::exp(sd * mu_ + 0.5 * sd * sd * sigma_ * sigma_);
}

std::array<double, 3> TransmittanceModel::truncated_raw_moments() const {
    const double hi = (family_ == Family::weibull_bw) ? std::min(1.0, eta0_) : 1.0;
    auto moment_integral = [&](int s) {
        auto f = [&](double eta) { return std::pow(eta, s) * density(eta); };
        if (family_ == Family::tabulated) {
            // Integrate segment by segment so the panel rule never straddles
            // a kink of the polyline.
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
                const double a = std::max(0.0, table_[i].first);
                const double b = std::min(hi, table_[i + 1].first);
                if (a < b) total += detail::integrate(f, a, b);
            }
            return total;
        }
        return detail::integrate(f, 0.0, hi);
    };
    const double norm = moment_integral(0);
    if (!(norm > 0.0))
        throw DegenerateError("transmittance density carries no mass on [0,1]");
    return {moment_integral(1) / norm, moment_integral(2) / norm, moment_integral(3) / norm};
}

double TransmittanceModel::param(const std::string& name) const {
    if (family_ == Family::log_normal) {
        if (name == "mu") return mu_;
        if (name == "sigma") return sigma_;
    } else if (family_ == Family::weibull_bw) {
        if (name == "eta0") return eta0_;
        if (name == "shape") return shape_;
        if (name == "scale") return scale_;
        if (name == "wander_variance") return wvar_;
    }
    throw ParameterError("unknown parameter '" + name + "' for this family");
}

std::string TransmittanceModel::describe() const {
    std::ostringstream os;
    switch (family_) {
    case Family::log_normal:
        os << "log_normal(mu=" << mu_ << ", sigma=" << sigma_ << ")";
        break;
    case Family::weibull_bw:
        os << "weibull_bw(eta0=" << eta0_ << ", shape=" << shape_ << ", scale=" << scale_
           << ", wander_variance=" << wvar_ << ")";
        break;
    case Family::tabulated:
        os << "tabulated(" << table_.size() << " nodes)";
        break;
    }
    return os.str();
}

DiscretePdt::DiscretePdt(int n, std::vector<double> weights) : n_(n) {
    if (n < 1) throw ParameterError("DiscretePdt: grid resolution n must be >= 1");
    if (weights.size() != static_cast<std::size_t>(n) + 1)
        throw ParameterError("DiscretePdt: need exactly n+1 weights");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ParameterError("DiscretePdt: weights must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw DegenerateError("DiscretePdt: weights carry no mass");
    // Leave already-normalized input untouched so rebuilding a pdt from its
    // own weights is exact; anything else gets divided by the total.
    if (std::fabs(total - 1.0) > 1e-12)
        for (double& w : weights) w /= total;
    weights_ = std::move(weights);
}

DiscretePdt discretize(const TransmittanceModel& model, int n) {
    if (n < 1) throw ParameterError("discretize: grid resolution n must be >= 1");
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double d = model.density(static_cast<double>(k) / n);
        if (!std::isfinite(d))
            throw DomainError("discretize: density is singular at a grid point");
        w[static_cast<std::size_t>(k)] = d;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0))
        throw DegenerateError("discretize: density vanishes on the whole grid");
    return DiscretePdt(n, std::move(w));
}

TransmittanceMoments transmittance_moments(const DiscretePdt& pdt, int max_order) {
    if (max_order < 1) throw DomainError("transmittance_moments: max_order must be >= 1");
    const int top = std::max(max_order, 3);
    std::vector<double> raw(static_cast<std::size_t>(top) + 1, 0.0);
    for (int k = 0; k <= pdt.n(); ++k) {
        const double wk = pdt.weight(k);
        if (wk == 0.0) continue;
        double p = 1.0;
        const double eta = pdt.eta(k);
        raw[0] += wk;
        for (int s = 1; s <= top; ++s) {
            p *= eta;
            raw[static_cast<std::size_t>(s)] += wk * p;
        }
    }
    TransmittanceMoments m;
    m.mean = raw[1];
    double var = raw[2] - raw[1] * raw[1];
    if (var < 0.0 && var > -1e-14) var = 0.0;
    m.variance = var;
    if (var > 0.0) {
        const double mu3 = raw[3] - 3.0 * raw[1] * raw[2] + 2.0 * raw[1] * raw[1] * raw[1];
        m.skewness = mu3 / std::pow(var, 1.5);
    }
    raw.resize(static_cast<std::size_t>(max_order) + 1);
    m.raw = std::move(raw);
    return m;
}

DiscretizationErrors discretization_errors(const TransmittanceModel& model,
                                           const DiscretePdt& pdt) {
    const TransmittanceMoments dm = transmittance_moments(pdt, 3);
    const std::array<double, 3> cont = model.truncated_raw_moments();
    DiscretizationErrors out{};
    for (int s = 1; s <= 3; ++s) {
        const double c = cont[static_cast<std::size_t>(s - 1)];
        if (std::fabs(c) < 1e-300)
            throw DomainError("discretization_errors: continuous reference moment is zero, "
                              "relative error undefined");
        out.vs_truncated[static_cast<std::size_t>(s - 1)] =
            std::fabs(dm.raw[static_cast<std::size_t>(s)] - c) / std::fabs(c);
    }
    if (model.family() == TransmittanceModel::Family::log_normal) {
        std::array<double, 3> closed{};
        for (int s = 1; s <= 3; ++s) {
            const double c = model.closed_moment(s);
            closed[static_cast<std::size_t>(s - 1)] =
                std::fabs(dm.raw[static_cast<std::size_t>(s)] - c) / std::fabs(c);
        }
        out.vs_closed_form = closed;
    }
    return out;
}

DiscretePdt post_select(const DiscretePdt& pdt, double eta_ps) {
    check_eta_domain(eta_ps);
    std::vector<double> w(pdt.size(), 0.0);
    double surviving = 0.0;
    for (int k = 0; k <= pdt.n(); ++k) {
        if (pdt.eta(k) >= eta_ps) {
            w[static_cast<std::size_t>(k)] = pdt.weight(k);
            surviving += pdt.weight(k);
        }
    }
    if (!(surviving > 0.0))
        throw EmptySelectionError("post_select: no probability mass survives the threshold");
    return DiscretePdt(pdt.n(), std::move(w));
}

DiscretePdt beta_binomial(int n, double alpha, double beta) {
    if (n < 1) throw ParameterError("beta_binomial: grid resolution n must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw ParameterError("beta_binomial: need alpha > 0 and beta > 0");
    const double nd = static_cast<double>(n);
    const double lbeta_ab = std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double lchoose =
            std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
        const double lbeta_k = std::lgamma(kd + alpha) + std::lgamma(nd - kd + beta) -
                               std::lgamma(nd + alpha + beta);
        w[static_cast<std::size_t>(k)] = std::exp(lchoose + lbeta_k - lbeta_ab);
    }
    return DiscretePdt(n, std::move(w));
}

DiscretePdt empirical_pdt(const std::vector<double>& samples, int n) {
    if (n < 1) throw ParameterError("empirical_pdt: grid resolution n must be >= 1");
    if (samples.empty()) throw EmptyInputError("empirical_pdt: no samples given");
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    for (double s : samples) {
        check_eta_domain(s);
        const auto k = static_cast<std::size_t>(std::llround(s * n));
        w[k] += 1.0;
    }
    return DiscretePdt(n, std::move(w));
}

void write_pdt_csv(const DiscretePdt& pdt, std::ostream& out) {
    out << "eta,value\n";
    for (int k = 0; k <= pdt.n(); ++k)
        out << detail::format_double(pdt.eta(k)) << ',' << detail::format_double(pdt.weight(k))
            << '\n';
}

void write_pdt_csv(const DiscretePdt& pdt, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_pdt_csv(pdt, f);
    if (!f.good()) throw IoError("failed writing '" + path + "'");
}

namespace {

std::vector<std::pair<double, double>> read_eta_value_rows(std::istream& in,
                                                           const std::string& context) {
    std::vector<std::pair<double, double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_eol(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "eta,value")
                throw SchemaError(context + ":" + std::to_string(lineno) +
                                  ": expected header 'eta,value'");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2)
            throw SchemaError(context + ":" + std::to_string(lineno) + ": expected 2 fields");
        rows.emplace_back(detail::parse_double(fields[0], context, lineno),
                          detail::parse_double(fields[1], context, lineno));
    }
    if (!header_seen) throw SchemaError(context + ": missing 'eta,value' header");
    if (rows.empty()) throw SchemaError(context + ": no data rows");
    return rows;
}

} // namespace

DiscretePdt read_pdt_csv(std::istream& in, const std::string& context) {
    const auto rows = read_eta_value_rows(in, context);
    if (rows.size() < 2) throw SchemaError(context + ": a discrete PDT needs at least 2 rows");
    const int n = static_cast<int>(rows.size()) - 1;
    std::vector<double> w;
    w.reserve(rows.size());
    for (int k = 0; k <= n; ++k) {
        const double expected = static_cast<double>(k) / n;
        if (std::fabs(rows[static_cast<std::size_t>(k)].first - expected) > 1e-9)
            throw SchemaError(context + ": support points are not the equidistant grid k/" +
                              std::to_string(n));
        w.push_back(rows[static_cast<std::size_t>(k)].second);
    }
    return DiscretePdt(n, std::move(w));
}

DiscretePdt read_pdt_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    return read_pdt_csv(f, path);
}

TransmittanceModel read_tabulated_csv(std::istream& in, const std::string& context) {
    return TransmittanceModel::tabulated(read_eta_value_rows(in, context));
}

TransmittanceModel read_tabulated_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    return read_tabulated_csv(f, path);
}

} // namespace fadelab
