#pragma once

#include <vector>

namespace fadelab {

// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations.
//
// A is row-major dim x dim and must be symmetric within sym_tol relative to
// its Frobenius norm (contract violation otherwise). Sweeps run until the
// off-diagonal Frobenius norm drops below `tol` times the matrix Frobenius
// norm, which for the handful-of-rows matrices used here happens within a
// few sweeps and leaves every eigenvalue accurate to O(tol * ||A||).
// Returns the eigenvalues sorted ascending.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, int dim, double tol = 1e-15,
                                       double sym_tol = 1e-12);

} // namespace fadelab
