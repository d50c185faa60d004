#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qobs {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

inline constexpr Complex kI{0.0, 1.0};

namespace linalg {

/// Largest entry modulus; 0 for empty matrices.
double max_abs(const CMatrix& m);

/// Block-diagonal direct sum.
CMatrix direct_sum(const CMatrix& a, const CMatrix& b);

/// sigma_min / sigma_max; 1 for an empty matrix, 0 for the zero matrix.
double reciprocal_condition(const CMatrix& m);

/// Eigenvalues of a square matrix.
///
/// Rows and columns that already decouple are first isolated by symmetric
/// permutation (as LAPACK's balancing does), so eigenvalues of matrices that
/// are permutation-similar to a triangular matrix are read off exactly even
/// when they are defective. The remaining core goes through a complex QR.
/// Output is sorted by (real, imag).
std::vector<Complex> eigenvalues(const CMatrix& a);

/// Solves A X + X A^dagger + Q = 0 by Bartels-Stewart on the complex Schur
/// form. Throws InvalidArgument if lambda_i + conj(lambda_j) vanishes.
CMatrix solve_lyapunov(const CMatrix& a, const CMatrix& q);

/// exp(A) by scaling and squaring with a Taylor series.
CMatrix expm(const CMatrix& a);

/// Orthonormal basis (columns) for the null space of m, with singular values
/// below tol * max(1, sigma_max) treated as zero.
CMatrix null_space(const CMatrix& m, double tol);

}  // namespace linalg
}  // namespace qobs
