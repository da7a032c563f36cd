#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lueq/complex_matrix.hpp"
#include "lueq/states.hpp"
#include "lueq/tolerance.hpp"

namespace lueq {

/// Reduced density matrices of the eigenvectors:
/// rhos[i] = A_i A_i^dag on H_A, thetas[i] = A_i^dag A_i on H_B.
struct ReducedFamily {
    std::vector<ComplexMatrix> rhos;
    std::vector<ComplexMatrix> thetas;
    std::size_t n = 0;
};

/// Cubic tensor of trace invariants, n x n x n, complex entries.
struct Tensor3 {
    std::size_t n = 0;
    std::vector<cplx> data;

    Tensor3() = default;
    explicit Tensor3(std::size_t n) : n(n), data(n * n * n, cplx(0.0, 0.0)) {}

    cplx& at(std::size_t i, std::size_t j, std::size_t k) { return data[(i * n + j) * n + k]; }
    const cplx& at(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * n + j) * n + k];
    }
};

/// The full invariant record of one state. omega/theta_mat are real symmetric,
/// zero-padded to n_sq x n_sq (n_sq = min(dim_a, dim_b)^2); entries with any
/// index beyond the rank are exactly zero. x/y tensors are kept complex: the
/// entries are real only for commuting families, and classification must see
/// the raw values.
struct InvariantSet {
    std::vector<double> j_moments;  // J^1 .. J^n
    ComplexMatrix omega;
    ComplexMatrix theta_mat;
    Tensor3 x_tensor;
    Tensor3 y_tensor;
    std::size_t n = 0;
    std::size_t n_sq = 0;
};

enum class GenericityLabel { NonGeneric, HighGeneric, Generic, Chg };

/// Which reduced matrices must have full rank for the CHG test.
enum class FullRankMode { All, Any };

struct GenericityClass {
    GenericityLabel label = GenericityLabel::NonGeneric;
    bool generic = false;       // both block determinants nonzero
    bool high_generic = false;  // at least one block determinant nonzero
    bool chg = false;
    double det_omega_n = 0.0;  // det of the leading n x n block
    double det_theta_n = 0.0;
    double max_commutator_norm = 0.0;
    std::size_t min_rho_rank = 0;
    std::size_t max_rho_rank = 0;
};

std::string to_string(GenericityLabel label);

ReducedFamily reduced_family(const EigenSystem& es);

/// Omega_ij = tr(rho_i rho_j), Theta_ij = tr(theta_i theta_j), padded to
/// n_sq x n_sq. Throws ResidualImaginaryError if a product trace has an
/// imaginary part above 1e-10 (these traces are real for Hermitian factors).
std::pair<ComplexMatrix, ComplexMatrix> metric_tensors(const ReducedFamily& rf, std::size_t n_sq);

/// X_ijk = tr(rho_i rho_j rho_k), Y_ijk = tr(theta_i theta_j theta_k).
/// The conjugate-symmetric combination X_ijk + X_kji must be real; its
/// imaginary residue above 1e-10 throws ResidualImaginaryError.
std::pair<Tensor3, Tensor3> trilinear_tensors(const ReducedFamily& rf);

/// J^s = sum_i lambda_i^s for s = 1..n (the full trace of rho^s).
std::vector<double> j_moments(const EigenSystem& es);

/// Convenience bundle of all of the above.
InvariantSet compute_invariants(const EigenSystem& es, const ReducedFamily& rf);
InvariantSet compute_invariants(const BipartiteState& state, const Tolerance& tol);

/// Genericity / CHG classification with diagnostics. Determinants are taken
/// on the leading n x n blocks; the padded matrices are storage only.
GenericityClass classify(const EigenSystem& es, const ReducedFamily& rf, const InvariantSet& inv,
                         const Tolerance& tol, FullRankMode mode = FullRankMode::All);

}  // namespace lueq
