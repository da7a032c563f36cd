#include "lueq/invariants.hpp"

#include <cmath>
#include <string>

#include "lueq/errors.hpp"
#include "lueq/numerics.hpp"

namespace lueq {

namespace {

constexpr double kImagResidueLimit = 1e-10;

cplx product_trace(const ComplexMatrix& a, const ComplexMatrix& b) {
    // tr(ab) without forming the product.
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, i);
    return acc;
}

}  // namespace

std::string to_string(GenericityLabel label) {
    switch (label) {
        case GenericityLabel::NonGeneric: return "NonGeneric";
        case GenericityLabel::HighGeneric: return "HighGeneric";
        case GenericityLabel::Generic: return "Generic";
        case GenericityLabel::Chg: return "CHG";
    }
    return "?";
}

ReducedFamily reduced_family(const EigenSystem& es) {
    ReducedFamily rf;
    rf.n = es.n;
    rf.rhos.reserve(es.n);
    rf.thetas.reserve(es.n);
    for (const ComplexMatrix& a : es.coeff_mats) {
        rf.rhos.push_back(a * a.dagger());
        rf.thetas.push_back(a.dagger() * a);
    }
    return rf;
}

std::pair<ComplexMatrix, ComplexMatrix> metric_tensors(const ReducedFamily& rf, std::size_t n_sq) {
    if (rf.n > n_sq) throw DimensionMismatchError("rank exceeds n_sq in metric_tensors");
    ComplexMatrix omega(n_sq, n_sq);
    ComplexMatrix theta(n_sq, n_sq);
    for (std::size_t i = 0; i < rf.n; ++i) {
        for (std::size_t j = 0; j < rf.n; ++j) {
            const cplx o = product_trace(rf.rhos[i], rf.rhos[j]);
            const cplx t = product_trace(rf.thetas[i], rf.thetas[j]);
            if (std::abs(o.imag()) > kImagResidueLimit || std::abs(t.imag()) > kImagResidueLimit) {
                throw ResidualImaginaryError(
                    "metric tensor entry has imaginary residue " +
                    std::to_string(std::max(std::abs(o.imag()), std::abs(t.imag()))));
            }
            omega(i, j) = o.real();
            theta(i, j) = t.real();
        }
    }
    return {omega, theta};
}

std::pair<Tensor3, Tensor3> trilinear_tensors(const ReducedFamily& rf) {
    Tensor3 x(rf.n);
    Tensor3 y(rf.n);
    for (std::size_t i = 0; i < rf.n; ++i)
        for (std::size_t j = 0; j < rf.n; ++j) {
            const ComplexMatrix rij = rf.rhos[i] * rf.rhos[j];
            const ComplexMatrix tij = rf.thetas[i] * rf.thetas[j];
            for (std::size_t k = 0; k < rf.n; ++k) {
                x.at(i, j, k) = product_trace(rij, rf.rhos[k]);
                y.at(i, j, k) = product_trace(tij, rf.thetas[k]);
            }
        }
    // tr(rho_i rho_j rho_k) conjugates to tr(rho_k rho_j rho_i); the
    // symmetrized combination is real and its residue bounds the noise.
    for (std::size_t i = 0; i < rf.n; ++i)
        for (std::size_t j = 0; j < rf.n; ++j)
            for (std::size_t k = 0; k < rf.n; ++k) {
                const double rx = std::abs((x.at(i, j, k) + x.at(k, j, i)).imag());
                const double ry = std::abs((y.at(i, j, k) + y.at(k, j, i)).imag());
                if (rx > kImagResidueLimit || ry > kImagResidueLimit) {
                    throw ResidualImaginaryError("trilinear tensor symmetrization residue " +
                                                 std::to_string(std::max(rx, ry)));
                }
            }
    return {x, y};
}

std::vector<double> j_moments(const EigenSystem& es) {
    std::vector<double> j(es.n, 0.0);
    for (std::size_t s = 1; s <= es.n; ++s) {
        double acc = 0.0;
        for (const double lambda : es.lambdas) acc += std::pow(lambda, static_cast<double>(s));
        j[s - 1] = acc;
    }
    return j;
}

InvariantSet compute_invariants(const EigenSystem& es, const ReducedFamily& rf) {
    InvariantSet inv;
    inv.n = es.n;
    const std::size_t nmin = std::min(es.dim_a, es.dim_b);
    inv.n_sq = nmin * nmin;
    inv.j_moments = j_moments(es);
    auto [omega, theta] = metric_tensors(rf, inv.n_sq);
    inv.omega = std::move(omega);
    inv.theta_mat = std::move(theta);
    auto [x, y] = trilinear_tensors(rf);
    inv.x_tensor = std::move(x);
    inv.y_tensor = std::move(y);
    return inv;
}

InvariantSet compute_invariants(const BipartiteState& state, const Tolerance& tol) {
    const EigenSystem es = eigensystem(state, tol);
    const ReducedFamily rf = reduced_family(es);
    return compute_invariants(es, rf);
}

GenericityClass classify(const EigenSystem& es, const ReducedFamily& rf, const InvariantSet& inv,
                         const Tolerance& tol, FullRankMode mode) {
    GenericityClass out;

    out.det_omega_n = leading_block_det(inv.omega, inv.n).real();
    out.det_theta_n = leading_block_det(inv.theta_mat, inv.n).real();
    const bool omega_ok = std::abs(out.det_omega_n) > tol.eps_zero;
    const bool theta_ok = std::abs(out.det_theta_n) > tol.eps_zero;
    out.generic = omega_ok && theta_ok;
    out.high_generic = omega_ok || theta_ok;

    double max_comm = 0.0;
    for (std::size_t i = 0; i < rf.n; ++i)
        for (std::size_t j = i + 1; j < rf.n; ++j) {
            max_comm = std::max(max_comm, commutator(rf.rhos[i], rf.rhos[j]).frobenius_norm());
            max_comm = std::max(max_comm, commutator(rf.thetas[i], rf.thetas[j]).frobenius_norm());
        }
    out.max_commutator_norm = max_comm;

    std::size_t min_rank = es.dim_a;
    std::size_t max_rank = 0;
    for (const ComplexMatrix& r : rf.rhos) {
        const std::size_t rk = rank(r, tol);
        min_rank = std::min(min_rank, rk);
        max_rank = std::max(max_rank, rk);
    }
    if (rf.n == 0) min_rank = 0;
    out.min_rho_rank = min_rank;
    out.max_rho_rank = max_rank;

    const bool full_rank_ok =
        (mode == FullRankMode::All) ? (min_rank == es.dim_a && rf.n > 0) : (max_rank == es.dim_a);
    out.chg = out.high_generic && max_comm < tol.eps_zero && full_rank_ok;

    out.label = out.chg       ? GenericityLabel::Chg
                : out.generic ? GenericityLabel::Generic
                : out.high_generic ? GenericityLabel::HighGeneric
                                   : GenericityLabel::NonGeneric;
    return out;
}

}  // namespace lueq
