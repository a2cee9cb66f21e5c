#pragma once

#include <vector>

#include "ddhinf/matrix.hpp"

namespace ddhinf {

/// Full symmetric eigendecomposition M = V diag(values) V^T, eigenvalues
/// ascending. Cyclic Jacobi; converges when the off-diagonal Frobenius norm
/// drops below 1e-12 * ||M||_F, at most 100 sweeps.
struct EigenSym {
    std::vector<double> values;  // ascending
    Mat vectors;                 // columns are eigenvectors, same order
};

EigenSym eigen_sym(const SymMat& m);

double min_eigenvalue(const SymMat& m);
double max_eigenvalue(const SymMat& m);

/// True iff lambda_max(m) < -margin.
bool is_negative_definite(const SymMat& m, double margin = 0.0);

/// Schur complement M11 - M12 M22^{-1} M21 where M22 is the trailing block
/// starting at row/col `block_split`. The caller guarantees M22 is negative
/// definite; a (numerically) singular M22 raises SingularBlock.
SymMat schur_complement(const SymMat& m, int block_split);

/// Max |eigenvalue| of a square real matrix. Hessenberg reduction followed
/// by shifted QR iteration in complex arithmetic (Wilkinson shift,
/// at most 30*dim iterations).
double spectral_radius(const Mat& m);

/// Symmetric square root of a positive semidefinite matrix (eigenvalue
/// clamping at zero for roundoff-negative modes).
Mat sqrt_psd(const SymMat& m);

}  // namespace ddhinf
