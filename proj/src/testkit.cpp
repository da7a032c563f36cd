#include "lueq/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lueq/errors.hpp"
#include "lueq/numerics.hpp"
#include "lueq/prng.hpp"

namespace lueq::testkit {

namespace {

ComplexMatrix ginibre(std::size_t dim, Prng& prng) {
    ComplexMatrix g(dim, dim);
    for (auto& e : g.entries()) e = prng.complex_normal();
    return g;
}

ComplexMatrix haar_from_prng(std::size_t dim, Prng& prng) {
    const ComplexMatrix g = ginibre(dim, prng);
    ComplexMatrix q(dim, dim);
    std::vector<std::vector<cplx>> cols;
    cols.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        std::vector<cplx> v = g.column(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& prev : cols) {
                cplx overlap = 0.0;
                for (std::size_t i = 0; i < dim; ++i) overlap += std::conj(prev[i]) * v[i];
                for (std::size_t i = 0; i < dim; ++i) v[i] -= overlap * prev[i];
            }
        }
        double norm = 0.0;
        for (const auto& x : v) norm += std::norm(x);
        norm = std::sqrt(norm);
        // A Ginibre draw is almost surely full rank; a tiny norm only means
        // numeric degeneracy of this draw, so restart with fresh columns.
        if (norm < 1e-8) return haar_from_prng(dim, prng);
        for (auto& x : v) x /= norm;
        cols.push_back(std::move(v));
    }
    for (std::size_t j = 0; j < dim; ++j) q.set_column(j, cols[j]);
    return q;
}

/// Spectrum on the simplex with pairwise gaps >= min_gap, descending.
std::vector<double> random_spectrum(std::size_t n, Prng& prng, double min_gap) {
    for (int attempt = 0; attempt < 500; ++attempt) {
        std::vector<double> lam(n);
        double sum = 0.0;
        for (auto& l : lam) {
            l = prng.uniform(0.2, 1.0);
            sum += l;
        }
        for (auto& l : lam) l /= sum;
        std::sort(lam.begin(), lam.end(), std::greater<double>());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (lam[i] - lam[i + 1] < min_gap) ok = false;
        if (ok) return lam;
    }
    throw GenerationFailedError("could not draw a spectrum with the requested gaps");
}

ComplexMatrix density_from_vectors(const std::vector<std::vector<cplx>>& phis,
                                   const std::vector<double>& lam, std::size_t dim) {
    ComplexMatrix rho(dim, dim);
    for (std::size_t i = 0; i < phis.size(); ++i)
        for (std::size_t x = 0; x < dim; ++x)
            for (std::size_t y = 0; y < dim; ++y)
                rho(x, y) += lam[i] * phis[i][x] * std::conj(phis[i][y]);
    return rho;
}

}  // namespace

ComplexMatrix haar_unitary(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("haar_unitary: dim must be positive");
    Prng prng(seed);
    return haar_from_prng(dim, prng);
}

ComplexMatrix random_hermitian_unit(std::size_t dim, std::uint64_t seed) {
    Prng prng(seed);
    const ComplexMatrix g = ginibre(dim, prng);
    ComplexMatrix h = cplx(0.5, 0.0) * (g + g.dagger());
    const double norm = h.frobenius_norm();
    if (norm == 0.0) return random_hermitian_unit(dim, seed + 1);
    return cplx(1.0 / norm, 0.0) * h;
}

BipartiteState random_density_state(std::size_t dim_a, std::size_t dim_b, std::size_t rank,
                                    std::uint64_t seed, const Tolerance& tol, double min_gap) {
    const std::size_t dim = dim_a * dim_b;
    if (rank == 0 || rank > dim) throw std::invalid_argument("random_density_state: bad rank");
    Prng prng(seed);
    const ComplexMatrix basis = haar_from_prng(dim, prng);
    const std::vector<double> lam = random_spectrum(rank, prng, min_gap);
    std::vector<std::vector<cplx>> phis;
    for (std::size_t i = 0; i < rank; ++i) phis.push_back(basis.column(i));
    BipartiteState state{dim_a, dim_b, density_from_vectors(phis, lam, dim)};
    (void)tol;
    return state;
}

BipartiteState random_chg_state(std::size_t dim_a, std::size_t dim_b, std::size_t rank,
                                std::uint64_t seed, const Tolerance& tol, const ChgOptions& opts) {
    if (dim_a == 0 || dim_b == 0 || dim_a > dim_b)
        throw std::invalid_argument("random_chg_state: requires 1 <= dim_a <= dim_b");
    const std::size_t n_sq = std::min(dim_a, dim_b) * std::min(dim_a, dim_b);
    if (rank == 0 || rank > n_sq)
        throw std::invalid_argument("random_chg_state: rank must be in 1..min(dims)^2");
    if (rank > dim_b) {
        // A commuting full-rank family pins rho_i to a shared eigenbasis, so the
        // theta_i eigenvalue vectors live in R^dim_b and at most dim_b of them
        // can stay independent; beyond that no high-generic branch survives.
        throw GenerationFailedError("CHG states cannot have rank above dim_b (" +
                                    std::to_string(dim_b) + ")");
    }
    const bool shifts = opts.use_shifts || rank > dim_a;

    Prng prng(seed);
    const std::size_t dim = dim_a * dim_b;
    for (std::size_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
        const ComplexMatrix p = haar_from_prng(dim_a, prng);
        const ComplexMatrix q = haar_from_prng(dim_b, prng);

        std::vector<ComplexMatrix> coeffs;  // A_i = p * B_i * q^dag
        if (!shifts) {
            // Shared diagonal: draw positive vectors, Gram-Schmidt them in
            // R^dim_a, keep only well-conditioned families.
            std::vector<std::vector<double>> d(rank, std::vector<double>(dim_a));
            bool ok = true;
            for (std::size_t i = 0; i < rank && ok; ++i) {
                for (auto& x : d[i]) x = prng.uniform(0.3, 1.0);
                for (std::size_t j = 0; j < i; ++j) {
                    double overlap = 0.0;
                    for (std::size_t k = 0; k < dim_a; ++k) overlap += d[j][k] * d[i][k];
                    for (std::size_t k = 0; k < dim_a; ++k) d[i][k] -= overlap * d[j][k];
                }
                double norm = 0.0;
                for (const double x : d[i]) norm += x * x;
                norm = std::sqrt(norm);
                if (norm < 0.1) ok = false;
                for (auto& x : d[i]) x /= norm;
                for (const double x : d[i])
                    if (std::abs(x) < 0.05) ok = false;  // full-rank margin
            }
            if (!ok) continue;
            for (std::size_t i = 0; i < rank; ++i) {
                ComplexMatrix b(dim_a, dim_b);
                for (std::size_t k = 0; k < dim_a; ++k) b(k, k) = d[i][k];
                coeffs.push_back(p * b * q.dagger());
            }
        } else {
            // Disjoint shifted-diagonal supports: B_i places its values at
            // (k, (k + o_i) mod dim_b) with distinct offsets o_i, which makes
            // the eigenvectors orthonormal automatically and keeps both
            // reduced families commuting.
            std::vector<std::size_t> offsets(dim_b);
            std::iota(offsets.begin(), offsets.end(), 0);
            for (std::size_t i = dim_b; i-- > 1;) std::swap(offsets[i], offsets[prng.index(i + 1)]);
            offsets.resize(rank);
            bool ok = true;
            for (std::size_t i = 0; i < rank && ok; ++i) {
                std::vector<double> c(dim_a);
                double norm = 0.0;
                for (auto& x : c) {
                    x = prng.uniform(0.3, 1.0);
                    norm += x * x;
                }
                norm = std::sqrt(norm);
                for (auto& x : c) x /= norm;
                for (const double x : c)
                    if (std::abs(x) < 0.05) ok = false;
                ComplexMatrix b(dim_a, dim_b);
                for (std::size_t k = 0; k < dim_a; ++k) b(k, (k + offsets[i]) % dim_b) = c[k];
                coeffs.push_back(p * b * q.dagger());
            }
            if (!ok) continue;
        }

        std::vector<double> lam;
        if (!opts.fixed_spectrum.empty()) {
            if (opts.fixed_spectrum.size() != rank)
                throw std::invalid_argument("random_chg_state: fixed_spectrum length != rank");
            lam = opts.fixed_spectrum;
        } else {
            lam = random_spectrum(rank, prng, opts.min_gap);
        }
        if (opts.fixed_spectrum.empty() && opts.degenerate_spectrum && rank >= 2) {
            const std::size_t i = prng.index(rank - 1);
            const double mean = 0.5 * (lam[i] + lam[i + 1]);
            lam[i] = mean;
            lam[i + 1] = mean;
        }

        std::vector<std::vector<cplx>> phis;
        for (const auto& a : coeffs) phis.push_back(coeff_to_vector(a));
        BipartiteState state{dim_a, dim_b, density_from_vectors(phis, lam, dim)};

        const EigenSystem es = eigensystem(state, tol);
        if (es.n != rank) continue;
        const ReducedFamily rf = reduced_family(es);
        const InvariantSet inv = compute_invariants(es, rf);
        const GenericityClass cls = classify(es, rf, inv, tol);
        if (cls.chg) return state;
    }
    throw GenerationFailedError("random_chg_state: no CHG draw within max_attempts");
}

InvariantSet oracle_invariants(const BipartiteState& state, const Tolerance& tol) {
    const EigenSystem es = eigensystem(state, tol);
    const std::size_t n = es.n;
    const std::size_t na = state.dim_a;
    const std::size_t nb = state.dim_b;

    // Reduced matrices by explicit contraction of the eigenvectors.
    std::vector<std::vector<std::vector<cplx>>> rho(n), theta(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<cplx> phi = es.phis.column(i);
        rho[i].assign(na, std::vector<cplx>(na, 0.0));
        for (std::size_t k = 0; k < na; ++k)
            for (std::size_t kp = 0; kp < na; ++kp) {
                cplx acc = 0.0;
                for (std::size_t l = 0; l < nb; ++l)
                    acc += phi[k * nb + l] * std::conj(phi[kp * nb + l]);
                rho[i][k][kp] = acc;
            }
        theta[i].assign(nb, std::vector<cplx>(nb, 0.0));
        for (std::size_t l = 0; l < nb; ++l)
            for (std::size_t lp = 0; lp < nb; ++lp) {
                cplx acc = 0.0;
                for (std::size_t k = 0; k < na; ++k)
                    acc += phi[k * nb + l] * std::conj(phi[k * nb + lp]);
                theta[i][l][lp] = std::conj(acc);
            }
    }

    InvariantSet inv;
    inv.n = n;
    const std::size_t nmin = std::min(na, nb);
    inv.n_sq = nmin * nmin;

    inv.omega = ComplexMatrix(inv.n_sq, inv.n_sq);
    inv.theta_mat = ComplexMatrix(inv.n_sq, inv.n_sq);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx om = 0.0;
            for (std::size_t k = 0; k < na; ++k)
                for (std::size_t kp = 0; kp < na; ++kp) om += rho[i][k][kp] * rho[j][kp][k];
            cplx th = 0.0;
            for (std::size_t l = 0; l < nb; ++l)
                for (std::size_t lp = 0; lp < nb; ++lp) th += theta[i][l][lp] * theta[j][lp][l];
            inv.omega(i, j) = om.real();
            inv.theta_mat(i, j) = th.real();
        }

    inv.x_tensor = Tensor3(n);
    inv.y_tensor = Tensor3(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                cplx x = 0.0;
                for (std::size_t a = 0; a < na; ++a)
                    for (std::size_t b = 0; b < na; ++b)
                        for (std::size_t c = 0; c < na; ++c)
                            x += rho[i][a][b] * rho[j][b][c] * rho[k][c][a];
                cplx y = 0.0;
                for (std::size_t a = 0; a < nb; ++a)
                    for (std::size_t b = 0; b < nb; ++b)
                        for (std::size_t c = 0; c < nb; ++c)
                            y += theta[i][a][b] * theta[j][b][c] * theta[k][c][a];
                inv.x_tensor.at(i, j, k) = x;
                inv.y_tensor.at(i, j, k) = y;
            }

    // J^s as the paper composes it: power of the full state, trace over A,
    // then the remaining trace, all by explicit summation.
    const std::size_t dim = na * nb;
    std::vector<std::vector<cplx>> power(dim, std::vector<cplx>(dim, 0.0));
    for (std::size_t x = 0; x < dim; ++x) power[x][x] = 1.0;
    inv.j_moments.assign(n, 0.0);
    for (std::size_t s = 1; s <= n; ++s) {
        std::vector<std::vector<cplx>> next(dim, std::vector<cplx>(dim, 0.0));
        for (std::size_t x = 0; x < dim; ++x)
            for (std::size_t z = 0; z < dim; ++z) {
                cplx acc = 0.0;
                for (std::size_t y = 0; y < dim; ++y) acc += power[x][y] * state.rho(y, z);
                next[x][z] = acc;
            }
        power = std::move(next);
        // trace over A -> a dim_b x dim_b matrix, then its full trace
        cplx j = 0.0;
        for (std::size_t l = 0; l < nb; ++l) {
            cplx diag = 0.0;
            for (std::size_t k = 0; k < na; ++k) diag += power[k * nb + l][k * nb + l];
            j += diag;
        }
        inv.j_moments[s - 1] = j.real();
    }
    return inv;
}

BipartiteState perturb_nonlocal(const BipartiteState& state, double magnitude,
                                std::uint64_t seed) {
    if (!(magnitude > 0.0) || !(magnitude < 1.0))
        throw std::invalid_argument("perturb_nonlocal: magnitude must be in (0, 1)");
    const std::size_t dim = state.dim_a * state.dim_b;
    const ComplexMatrix h = random_hermitian_unit(dim, seed);
    const EigResult eig = hermitian_eig(h, Tolerance{});
    std::vector<cplx> phases(dim);
    for (std::size_t i = 0; i < dim; ++i) phases[i] = std::polar(1.0, magnitude * eig.values[i]);
    const ComplexMatrix u = eig.vectors * ComplexMatrix::diagonal(phases) * eig.vectors.dagger();
    return BipartiteState{state.dim_a, state.dim_b, u * state.rho * u.dagger()};
}

BipartiteState conjugate_bipartite(const BipartiteState& state, const ComplexMatrix& u,
                                   const ComplexMatrix& w) {
    const ComplexMatrix k = kron(u, w);
    return BipartiteState{state.dim_a, state.dim_b, k * state.rho * k.dagger()};
}

TripartiteState apply_local_tripartite(const TripartiteState& state, const ComplexMatrix& u_a,
                                       const ComplexMatrix& u_b, const ComplexMatrix& u_c) {
    const ComplexMatrix k = kron(kron(u_a, u_b), u_c);
    const std::size_t dim = state.psi.size();
    std::vector<cplx> out(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) out[i] += k(i, j) * state.psi[j];
    return TripartiteState{state.dim_a, state.dim_b, state.dim_c, out};
}

TripartiteState random_chg_tripartite(std::size_t dim_a, std::size_t dim_b, std::size_t dim_c,
                                      std::size_t rank, std::uint64_t seed, const Tolerance& tol,
                                      const ChgOptions& opts) {
    if (rank > dim_a)
        throw std::invalid_argument("random_chg_tripartite: purification needs rank <= dim_a");
    Prng prng(seed);
    const BipartiteState base = random_chg_state(dim_b, dim_c, rank, prng.next_u64(), tol, opts);
    const EigenSystem es = eigensystem(base, tol);
    const std::size_t nbc = dim_b * dim_c;
    std::vector<cplx> psi(dim_a * nbc, 0.0);
    for (std::size_t i = 0; i < es.n; ++i) {
        const std::vector<cplx> phi = es.phis.column(i);
        const double root = std::sqrt(es.lambdas[i]);
        for (std::size_t x = 0; x < nbc; ++x) psi[i * nbc + x] = root * phi[x];
    }
    TripartiteState state{dim_a, dim_b, dim_c, psi};
    const ComplexMatrix scramble = haar_from_prng(dim_a, prng);
    return apply_local_tripartite(state, scramble, ComplexMatrix::identity(dim_b),
                                  ComplexMatrix::identity(dim_c));
}

}  // namespace lueq::testkit
