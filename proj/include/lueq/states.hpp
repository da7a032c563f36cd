#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lueq/complex_matrix.hpp"
#include "lueq/tolerance.hpp"

namespace lueq {

/// Density matrix on H_A (x) H_B with the composite basis ordered
/// A-index major: row/column index k * dim_b + l.
struct BipartiteState {
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
    ComplexMatrix rho;
};

/// Pure state vector on H_A (x) H_B (x) H_C, index a*(Nb*Nc) + b*Nc + c.
struct TripartiteState {
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
    std::size_t dim_c = 0;
    std::vector<cplx> psi;
};

/// Spectral data of a bipartite density matrix restricted to its support.
///
/// coeff_mats[i] is the eigenvector phis column i reshaped row-major into the
/// dim_a x dim_b coefficient matrix (row = H_A basis index, column = H_B).
/// degeneracy_blocks partitions 0..n-1 into maximal runs of eigenvalues whose
/// adjacent gaps stay below eps_eig; stored as [begin, end) index pairs.
struct EigenSystem {
    std::size_t n = 0;
    std::vector<double> lambdas;  // descending, all > eps_zero
    ComplexMatrix phis;           // (dim_a*dim_b) x n, orthonormal columns
    std::vector<ComplexMatrix> coeff_mats;
    std::vector<std::pair<std::size_t, std::size_t>> degeneracy_blocks;
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
};

/// Checks Hermiticity, unit trace and positive semidefiniteness; throws
/// ValidationError naming the violated property.
BipartiteState validate_bipartite(const ComplexMatrix& raw, std::size_t dim_a, std::size_t dim_b,
                                  const Tolerance& tol);

TripartiteState validate_tripartite(const std::vector<cplx>& psi, std::size_t dim_a,
                                    std::size_t dim_b, std::size_t dim_c, const Tolerance& tol);

/// Eigenvalues above eps_zero with eigenvectors and coefficient matrices.
EigenSystem eigensystem(const BipartiteState& state, const Tolerance& tol);

/// Sum of lambda_i |phi_i><phi_i| over the retained spectrum.
ComplexMatrix reconstruct_density(const EigenSystem& es);

/// Trace over H_A of |psi><psi|; the result lives on H_B (x) H_C.
BipartiteState partial_trace_a(const TripartiteState& state);

/// Trace over H_B: dim_a x dim_a reduced matrix.
ComplexMatrix partial_trace_b(const BipartiteState& state);

/// Trace over H_A: dim_b x dim_b reduced matrix.
ComplexMatrix partial_trace_a_bip(const BipartiteState& state);

/// Reshape helpers between a composite-system vector and its coefficient matrix.
ComplexMatrix vector_to_coeff(const std::vector<cplx>& v, std::size_t dim_a, std::size_t dim_b);
std::vector<cplx> coeff_to_vector(const ComplexMatrix& a);

}  // namespace lueq
