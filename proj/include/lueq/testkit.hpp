#pragma once

#include <cstdint>
#include <vector>

#include "lueq/complex_matrix.hpp"
#include "lueq/invariants.hpp"
#include "lueq/states.hpp"
#include "lueq/tolerance.hpp"

namespace lueq::testkit {

/// Haar-distributed unitary: QR of a complex Ginibre matrix via modified
/// Gram-Schmidt, whose R diagonal is real positive by construction.
ComplexMatrix haar_unitary(std::size_t dim, std::uint64_t seed);

/// GUE-style random Hermitian matrix, Frobenius norm 1.
ComplexMatrix random_hermitian_unit(std::size_t dim, std::uint64_t seed);

/// Random rank-`rank` density matrix with Haar-random eigenvectors and a
/// simplex-distributed spectrum whose pairwise gaps are at least min_gap.
BipartiteState random_density_state(std::size_t dim_a, std::size_t dim_b, std::size_t rank,
                                    std::uint64_t seed, const Tolerance& tol,
                                    double min_gap = 1e-3);

struct ChgOptions {
    std::size_t max_attempts = 64;
    double min_gap = 1e-6;  // 10 * default eps_eig
    bool degenerate_spectrum = false;
    /// Build the eigenvector family on shifted diagonal supports instead of a
    /// shared diagonal; automatic for rank > dim_a, where a shared diagonal
    /// cannot host enough orthonormal vectors. Produces Theta-branch states.
    bool use_shifts = false;
    /// When non-empty, use this spectrum (descending, summing to 1) instead
    /// of drawing one. Lets callers build same-spectrum state pairs.
    std::vector<double> fixed_spectrum;
};

/// CHG state by construction: a shared simultaneous eigenbasis pair (P, Q)
/// carries coefficient matrices A_i = P D_i Q^dag whose reduced families
/// commute exactly; orthonormality of the eigenvectors reduces to
/// orthonormality of the diagonal vectors. Verified with classify, retried
/// up to max_attempts, otherwise throws GenerationFailedError.
BipartiteState random_chg_state(std::size_t dim_a, std::size_t dim_b, std::size_t rank,
                                std::uint64_t seed, const Tolerance& tol,
                                const ChgOptions& opts = {});

/// Fully independent invariant computation: reduced matrices by explicit
/// index contraction of |phi_i><phi_i| (never via coefficient-matrix
/// products) and every trace by explicit summation. Exists to cross-validate
/// the main invariants path.
InvariantSet oracle_invariants(const BipartiteState& state, const Tolerance& tol);

/// Conjugate by exp(i * magnitude * H) for a random unit-norm Hermitian H on
/// the joint space: spectrum is preserved exactly, local-unitary relatedness
/// is generically destroyed.
BipartiteState perturb_nonlocal(const BipartiteState& state, double magnitude,
                                std::uint64_t seed);

/// (u (x) w) rho (u (x) w)^dag.
BipartiteState conjugate_bipartite(const BipartiteState& state, const ComplexMatrix& u,
                                   const ComplexMatrix& w);

/// (u_a (x) u_b (x) u_c) |psi>.
TripartiteState apply_local_tripartite(const TripartiteState& state, const ComplexMatrix& u_a,
                                       const ComplexMatrix& u_b, const ComplexMatrix& u_c);

/// Purification of a CHG state on H_B (x) H_C with a scrambled H_A basis;
/// requires rank <= dim_a.
TripartiteState random_chg_tripartite(std::size_t dim_a, std::size_t dim_b, std::size_t dim_c,
                                      std::size_t rank, std::uint64_t seed, const Tolerance& tol,
                                      const ChgOptions& opts = {});

}  // namespace lueq::testkit
