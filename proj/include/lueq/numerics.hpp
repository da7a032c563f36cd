#pragma once

#include <cstddef>
#include <vector>

#include "lueq/complex_matrix.hpp"
#include "lueq/tolerance.hpp"

namespace lueq {

struct EigResult {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // orthonormal columns, values[k] <-> column k
};

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
/// Throws NonSquareError / NonHermitianError (gate at eps_zero, scaled).
EigResult hermitian_eig(const ComplexMatrix& m, const Tolerance& tol);

struct SvdResult {
    ComplexMatrix u;        // rows x rows unitary
    std::vector<double> s;  // min(rows, cols) values, descending, >= 0
    ComplexMatrix v;        // cols x cols unitary; m = u diag(s) v^dag
};

/// SVD via the eigendecomposition of m^dag m (right factor) with the left
/// factor from m v / s, completed on the kernel from m m^dag eigenvectors.
/// Each right-singular vector is phase-fixed so its largest-magnitude entry
/// is real positive, which makes the decomposition deterministic.
SvdResult svd(const ComplexMatrix& m);

std::vector<double> singular_values(const ComplexMatrix& m);

/// Determinant via LU with partial pivoting.
cplx det(const ComplexMatrix& m);

/// Count of singular values above eps_zero * s_max.
std::size_t rank(const ComplexMatrix& m, const Tolerance& tol);

/// ab - ba.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Closest unitary to m (polar factor u v^dag from the SVD).
ComplexMatrix polar_unitary(const ComplexMatrix& m);

/// det of the leading k x k block.
cplx leading_block_det(const ComplexMatrix& m, std::size_t k);

}  // namespace lueq
