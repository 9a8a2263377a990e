#include "quadrature.hpp"

#include <cmath>

#include "fadelab/errors.hpp"

namespace fadelab::detail {

namespace {

// 15-point Kronrod nodes/weights on [-1,1]; odd-indexed nodes are the
// embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double result_gauss = fc * kWg[3];
    double result_kronrod = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        result_kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) result_gauss += kWg[j / 2] * fsum;
    }
    result_gauss *= half;
    result_kronrod *= half;
    return {result_kronrod, std::fabs(result_kronrod - result_gauss)};
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, int depth) {
    const PanelResult r = gauss_kronrod(f, a, b);
    if (!std::isfinite(r.integral))
        throw DomainError("integrate: integrand produced a non-finite value");
    const double tol = abs_tol + rel_tol * std::fabs(r.integral);
    if (r.error <= tol || depth <= 0) return r.integral;
    const double mid = 0.5 * (a + b);
    return integrate_rec(f, a, mid, abs_tol * 0.5, rel_tol, depth - 1) +
           integrate_rec(f, mid, b, abs_tol * 0.5, rel_tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol, int max_depth) {
    if (!(a < b)) return 0.0;
    return integrate_rec(f, a, b, abs_tol, rel_tol, max_depth);
}

} // namespace fadelab::detail
