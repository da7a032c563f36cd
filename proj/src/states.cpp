#include "lueq/states.hpp"

#include <cmath>
#include <string>

#include "lueq/errors.hpp"
#include "lueq/numerics.hpp"

namespace lueq {

BipartiteState validate_bipartite(const ComplexMatrix& raw, std::size_t dim_a, std::size_t dim_b,
                                  const Tolerance& tol) {
    const std::size_t dim = dim_a * dim_b;
    if (dim_a == 0 || dim_b == 0 || !raw.is_square() || raw.rows() != dim) {
        throw ValidationError(ValidationError::Kind::DimensionMismatch,
                              "expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                                  " matrix for dims (" + std::to_string(dim_a) + "," +
                                  std::to_string(dim_b) + "), got " + std::to_string(raw.rows()) +
                                  "x" + std::to_string(raw.cols()));
    }
    if (!raw.is_finite()) {
        throw ValidationError(ValidationError::Kind::NotFinite, "matrix has non-finite entries");
    }
    if (!raw.is_hermitian(tol.eps_zero)) {
        throw ValidationError(ValidationError::Kind::NotHermitian,
                              "matrix is not Hermitian within eps_zero");
    }
    const EigResult eig = hermitian_eig(raw, tol);
    const double min_eig = eig.values.back();
    if (min_eig < -tol.eps_zero) {
        throw ValidationError(ValidationError::Kind::NotPositive,
                              "smallest eigenvalue " + std::to_string(min_eig) +
                                  " is below -eps_zero");
    }
    const cplx tr = raw.trace();
    if (std::abs(tr - cplx(1.0, 0.0)) > tol.eps_zero) {
        throw ValidationError(ValidationError::Kind::NotUnitTrace,
                              "trace is " + std::to_string(tr.real()) + " + " +
                                  std::to_string(tr.imag()) + "i, expected 1");
    }
    return BipartiteState{dim_a, dim_b, raw};
}

TripartiteState validate_tripartite(const std::vector<cplx>& psi, std::size_t dim_a,
                                    std::size_t dim_b, std::size_t dim_c, const Tolerance& tol) {
    const std::size_t dim = dim_a * dim_b * dim_c;
    if (dim_a == 0 || dim_b == 0 || dim_c == 0 || psi.size() != dim) {
        throw ValidationError(ValidationError::Kind::DimensionMismatch,
                              "expected a vector of length " + std::to_string(dim) + ", got " +
                                  std::to_string(psi.size()));
    }
    double norm_sq = 0.0;
    for (const auto& x : psi) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
            throw ValidationError(ValidationError::Kind::NotFinite, "vector has non-finite entries");
        }
        norm_sq += std::norm(x);
    }
    if (std::abs(std::sqrt(norm_sq) - 1.0) > tol.eps_zero) {
        throw ValidationError(ValidationError::Kind::NotNormalized,
                              "vector norm is " + std::to_string(std::sqrt(norm_sq)) +
                                  ", expected 1");
    }
    return TripartiteState{dim_a, dim_b, dim_c, psi};
}

EigenSystem eigensystem(const BipartiteState& state, const Tolerance& tol) {
    const EigResult eig = hermitian_eig(state.rho, tol);

    EigenSystem es;
    es.dim_a = state.dim_a;
    es.dim_b = state.dim_b;
    std::size_t n = 0;
    while (n < eig.values.size() && eig.values[n] > tol.eps_zero) ++n;
    es.n = n;
    es.lambdas.assign(eig.values.begin(), eig.values.begin() + n);

    es.phis = ComplexMatrix(state.dim_a * state.dim_b, n);
    es.coeff_mats.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<cplx> phi = eig.vectors.column(i);
        es.phis.set_column(i, phi);
        es.coeff_mats.push_back(vector_to_coeff(phi, state.dim_a, state.dim_b));
    }

    std::size_t begin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool last = (i + 1 == n);
        if (last || es.lambdas[i] - es.lambdas[i + 1] > tol.eps_eig) {
            es.degeneracy_blocks.emplace_back(begin, i + 1);
            begin = i + 1;
        }
    }
    return es;
}

ComplexMatrix reconstruct_density(const EigenSystem& es) {
    const std::size_t dim = es.dim_a * es.dim_b;
    ComplexMatrix rho(dim, dim);
    for (std::size_t i = 0; i < es.n; ++i) {
        const std::vector<cplx> phi = es.phis.column(i);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                rho(a, b) += es.lambdas[i] * phi[a] * std::conj(phi[b]);
    }
    return rho;
}

BipartiteState partial_trace_a(const TripartiteState& state) {
    const std::size_t nb = state.dim_b;
    const std::size_t nc = state.dim_c;
    const std::size_t nbc = nb * nc;
    ComplexMatrix rho(nbc, nbc);
    for (std::size_t a = 0; a < state.dim_a; ++a) {
        const std::size_t base = a * nbc;
        for (std::size_t x = 0; x < nbc; ++x)
            for (std::size_t y = 0; y < nbc; ++y)
                rho(x, y) += state.psi[base + x] * std::conj(state.psi[base + y]);
    }
    return BipartiteState{nb, nc, rho};
}

ComplexMatrix partial_trace_b(const BipartiteState& state) {
    ComplexMatrix out(state.dim_a, state.dim_a);
    for (std::size_t k = 0; k < state.dim_a; ++k)
        for (std::size_t kp = 0; kp < state.dim_a; ++kp) {
            cplx acc = 0.0;
            for (std::size_t l = 0; l < state.dim_b; ++l)
                acc += state.rho(k * state.dim_b + l, kp * state.dim_b + l);
            out(k, kp) = acc;
        }
    return out;
}

ComplexMatrix partial_trace_a_bip(const BipartiteState& state) {
    ComplexMatrix out(state.dim_b, state.dim_b);
    for (std::size_t l = 0; l < state.dim_b; ++l)
        for (std::size_t lp = 0; lp < state.dim_b; ++lp) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < state.dim_a; ++k)
                acc += state.rho(k * state.dim_b + l, k * state.dim_b + lp);
            out(l, lp) = acc;
        }
    return out;
}

ComplexMatrix vector_to_coeff(const std::vector<cplx>& v, std::size_t dim_a, std::size_t dim_b) {
    if (v.size() != dim_a * dim_b) throw DimensionMismatchError("vector length mismatch in reshape");
    ComplexMatrix a(dim_a, dim_b);
    for (std::size_t k = 0; k < dim_a; ++k)
        for (std::size_t l = 0; l < dim_b; ++l) a(k, l) = v[k * dim_b + l];
    return a;
}

std::vector<cplx> coeff_to_vector(const ComplexMatrix& a) {
    std::vector<cplx> v(a.rows() * a.cols());
    for (std::size_t k = 0; k < a.rows(); ++k)
        for (std::size_t l = 0; l < a.cols(); ++l) v[k * a.cols() + l] = a(k, l);
    return v;
}

}  // namespace lueq
