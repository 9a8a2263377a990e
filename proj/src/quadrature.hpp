#pragma once

#include <functional>

namespace fadelab::detail {

// Adaptive Gauss-Kronrod (G7, K15) quadrature on a finite interval.
// Subdivides until the embedded error estimate of every panel is below
// abs_tol + rel_tol * |integral|. Integrable endpoint singularities are
// handled by the subdivision; the integrand is never evaluated at the
// interval endpoints (K15 nodes are interior).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-11, int max_depth = 48);

} // namespace fadelab::detail
