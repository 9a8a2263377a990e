#include "fadelab/jacobi.hpp"

#include <algorithm>
#include <cmath>

#include "fadelab/errors.hpp"

namespace fadelab {

std::vector<double> jacobi_eigenvalues(std::vector<double> a, int dim, double tol,
                                       double sym_tol) {
    if (dim < 1 || a.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
        throw DomainError("jacobi_eigenvalues: matrix size mismatch");
    auto at = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) +
                 static_cast<std::size_t>(c)];
    };

    double fro2 = 0.0, asym2 = 0.0;
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            if (!std::isfinite(at(r, c)))
                throw DomainError("jacobi_eigenvalues: non-finite matrix entry");
            fro2 += at(r, c) * at(r, c);
            const double d = at(r, c) - at(c, r);
            asym2 += d * d;
        }
    if (asym2 > sym_tol * sym_tol * std::max(fro2, 1e-300))
        throw DomainError("jacobi_eigenvalues: matrix is not symmetric");
    // Work on the symmetrized matrix so 1-ulp asymmetries cannot bias sweeps.
    for (int r = 0; r < dim; ++r)
        for (int c = r + 1; c < dim; ++c) {
            const double m = 0.5 * (at(r, c) + at(c, r));
            at(r, c) = m;
            at(c, r) = m;
        }

    const double fro = std::sqrt(fro2);
    const double off_target = tol * std::max(fro, 1e-300);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off2 = 0.0;
        for (int r = 0; r < dim; ++r)
            for (int c = r + 1; c < dim; ++c) off2 += 2.0 * at(r, c) * at(r, c);
        if (std::sqrt(off2) <= off_target) break;

        for (int p = 0; p < dim - 1; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = at(p, p), aqq = at(q, q);
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int r = 0; r < dim; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = at(r, p), arq = at(r, q);
                    at(r, p) = arp - s * (arq + tau * arp);
                    at(p, r) = at(r, p);
                    at(r, q) = arq + s * (arp - tau * arq);
                    at(q, r) = at(r, q);
                }
            }
        }
    }

    std::vector<double> eig(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) eig[static_cast<std::size_t>(r)] = at(r, r);
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace fadelab
