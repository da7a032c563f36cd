#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lueq/errors.hpp"
#include "lueq/numerics.hpp"
#include "lueq/prng.hpp"
#include "lueq/states.hpp"
#include "lueq/testkit.hpp"
#include "test_support.hpp"

using namespace lueq;

namespace {

/// Direct contraction oracle for tr_B |phi><phi|.
ComplexMatrix contract_trace_b(const std::vector<cplx>& phi, std::size_t na, std::size_t nb) {
    ComplexMatrix out(na, na);
    for (std::size_t k = 0; k < na; ++k)
        for (std::size_t kp = 0; kp < na; ++kp) {
            cplx acc = 0.0;
            for (std::size_t l = 0; l < nb; ++l) acc += phi[k * nb + l] * std::conj(phi[kp * nb + l]);
            out(k, kp) = acc;
        }
    return out;
}

ComplexMatrix contract_trace_a(const std::vector<cplx>& phi, std::size_t na, std::size_t nb) {
    ComplexMatrix out(nb, nb);
    for (std::size_t l = 0; l < nb; ++l)
        for (std::size_t lp = 0; lp < nb; ++lp) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < na; ++k) acc += phi[k * nb + l] * std::conj(phi[k * nb + lp]);
            out(l, lp) = acc;
        }
    return out;
}

std::vector<cplx> random_unit_vector(std::size_t dim, std::uint64_t seed) {
    Prng prng(seed);
    std::vector<cplx> v(dim);
    double norm = 0.0;
    for (auto& x : v) {
        x = prng.complex_normal();
        norm += std::norm(x);
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

}  // namespace

TEST_CASE("validate accepts the maximally mixed state") {
    const Tolerance tol;
    const BipartiteState s =
        validate_bipartite(cplx(0.25, 0.0) * ComplexMatrix::identity(4), 2, 2, tol);
    CHECK(s.dim_a == 2);
    CHECK(s.dim_b == 2);
}

TEST_CASE("validate rejects each violated property by name") {
    const Tolerance tol;

    CHECK_THROWS_AS(validate_bipartite(ComplexMatrix::identity(3), 2, 2, tol), ValidationError);

    ComplexMatrix neg = ComplexMatrix::diagonal(std::vector<double>{0.5, 0.5, 0.0, -1e-6});
    bool caught = false;
    try {
        validate_bipartite(neg, 2, 2, tol);
    } catch (const ValidationError& e) {
        caught = true;
        CHECK(e.kind == ValidationError::Kind::NotPositive);
    }
    CHECK(caught);

    ComplexMatrix bad_trace = cplx(0.5, 0.0) * ComplexMatrix::identity(4);
    try {
        validate_bipartite(bad_trace, 2, 2, tol);
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(e.kind == ValidationError::Kind::NotUnitTrace);
    }

    ComplexMatrix non_herm = cplx(0.25, 0.0) * ComplexMatrix::identity(4);
    non_herm(0, 1) = cplx(0.1, 0.0);
    try {
        validate_bipartite(non_herm, 2, 2, tol);
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(e.kind == ValidationError::Kind::NotHermitian);
    }
}

TEST_CASE("validate accepts the Bell projector at rank 1") {
    const Tolerance tol;
    const BipartiteState bell = validate_bipartite(test::bell_state().rho, 2, 2, tol);
    const EigenSystem es = eigensystem(bell, tol);
    CHECK(es.n == 1);
    CHECK(es.lambdas[0] == doctest::Approx(1.0));
}

TEST_CASE("eigensystem of the Bell state gives A_1 = I/sqrt(2) up to phase") {
    const Tolerance tol;
    const EigenSystem es = eigensystem(test::bell_state(), tol);
    REQUIRE(es.n == 1);
    const ComplexMatrix& a = es.coeff_mats[0];
    // rho_1 = A A^dag = I/2 regardless of the eigenvector phase.
    CHECK(max_abs_diff(a * a.dagger(), cplx(0.5, 0.0) * ComplexMatrix::identity(2)) <= 1e-12);
    CHECK(std::abs(a(0, 1)) <= 1e-12);
    CHECK(std::abs(a(1, 0)) <= 1e-12);
    CHECK(std::abs(std::abs(a(0, 0)) - std::sqrt(0.5)) <= 1e-12);
}

TEST_CASE("eigensystem of the classical mixture has one degeneracy block") {
    const Tolerance tol;
    const EigenSystem es = eigensystem(test::mix_00_11(), tol);
    REQUIRE(es.n == 2);
    CHECK(es.lambdas[0] == doctest::Approx(0.5));
    CHECK(es.lambdas[1] == doctest::Approx(0.5));
    REQUIRE(es.degeneracy_blocks.size() == 1);
    CHECK(es.degeneracy_blocks[0].first == 0);
    CHECK(es.degeneracy_blocks[0].second == 2);
}

TEST_CASE("eigensystem normalization on random full-rank states") {
    const Tolerance tol;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const BipartiteState s = testkit::random_density_state(2, 2, 4, seed, tol);
        const EigenSystem es = eigensystem(s, tol);
        REQUIRE(es.n == 4);
        double sum = 0.0;
        for (const double l : es.lambdas) sum += l;
        CHECK(std::abs(sum - 1.0) <= 1e-10);
        for (const ComplexMatrix& a : es.coeff_mats)
            CHECK(std::abs(hs_inner(a, a).real() - 1.0) <= 1e-10);
    }
}

TEST_CASE("partial_trace_a of a product state is a rank-1 projector") {
    const Tolerance tol;
    std::vector<cplx> psi(8, 0.0);
    psi[0] = 1.0;  // |0>|0>|0>
    const TripartiteState t = validate_tripartite(psi, 2, 2, 2, tol);
    const BipartiteState r = partial_trace_a(t);
    ComplexMatrix expected(4, 4);
    expected(0, 0) = 1.0;
    CHECK(max_abs_diff(r.rho, expected) <= 1e-14);
}

TEST_CASE("partial_trace_a of GHZ is the classical mixture") {
    const Tolerance tol;
    std::vector<cplx> psi(8, 0.0);
    psi[0] = std::sqrt(0.5);
    psi[7] = std::sqrt(0.5);
    const TripartiteState t = validate_tripartite(psi, 2, 2, 2, tol);
    const BipartiteState r = partial_trace_a(t);
    ComplexMatrix expected(4, 4);
    expected(0, 0) = 0.5;
    expected(3, 3) = 0.5;
    CHECK(max_abs_diff(r.rho, expected) <= 1e-14);
}

TEST_CASE("partial_trace_a of random tripartite states is a valid density matrix") {
    const Tolerance tol;
    for (std::uint64_t seed = 11; seed <= 16; ++seed) {
        const std::vector<cplx> psi = random_unit_vector(2 * 2 * 3, seed);
        const TripartiteState t = validate_tripartite(psi, 2, 2, 3, tol);
        const BipartiteState r = partial_trace_a(t);
        CHECK(std::abs(r.rho.trace() - cplx(1.0, 0.0)) <= 1e-10);
        CHECK(r.rho.is_hermitian(1e-12));
        const EigResult eig = hermitian_eig(r.rho, tol);
        CHECK(eig.values.back() >= -1e-10);

        // Oracle: dense |psi><psi| then contraction over the first index.
        const std::size_t nbc = 6;
        ComplexMatrix dense(nbc, nbc);
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t x = 0; x < nbc; ++x)
                for (std::size_t y = 0; y < nbc; ++y)
                    dense(x, y) += psi[a * nbc + x] * std::conj(psi[a * nbc + y]);
        CHECK(max_abs_diff(dense, r.rho) <= 1e-12);
    }
}

TEST_CASE("bipartite partial traces: product and Bell cases") {
    const Tolerance tol;
    const BipartiteState bell = test::bell_state();
    CHECK(max_abs_diff(partial_trace_b(bell), cplx(0.5, 0.0) * ComplexMatrix::identity(2)) <=
          1e-14);

    // product rho_A (x) rho_B traced over B gives rho_A
    const ComplexMatrix rho_a = ComplexMatrix::diagonal(std::vector<double>{0.75, 0.25});
    const ComplexMatrix rho_b = ComplexMatrix::diagonal(std::vector<double>{0.6, 0.4});
    const BipartiteState prod{2, 2, kron(rho_a, rho_b)};
    CHECK(max_abs_diff(partial_trace_b(prod), rho_a) <= 1e-14);
    CHECK(max_abs_diff(partial_trace_a_bip(prod), rho_b) <= 1e-14);
}

TEST_CASE("partial trace preserves trace and Hermiticity") {
    const Tolerance tol;
    for (std::uint64_t seed = 31; seed <= 36; ++seed) {
        const BipartiteState s = testkit::random_density_state(2, 3, 4, seed, tol);
        const ComplexMatrix ta = partial_trace_b(s);
        CHECK(std::abs(ta.trace() - cplx(1.0, 0.0)) <= 1e-12);
        CHECK(ta.is_hermitian(1e-12));
    }
}

TEST_CASE("reshape round-trip is the identity") {
    for (std::uint64_t seed = 41; seed <= 44; ++seed) {
        const std::vector<cplx> v = random_unit_vector(6, seed);
        CHECK(coeff_to_vector(vector_to_coeff(v, 2, 3)) == v);
        CHECK(coeff_to_vector(vector_to_coeff(v, 3, 2)) == v);
    }
}

TEST_CASE("defining identity: both computation paths give rho_i and theta_i") {
    const Tolerance tol;
    for (std::uint64_t seed = 51; seed <= 56; ++seed) {
        const BipartiteState s = testkit::random_density_state(2, 3, 3, seed, tol);
        const EigenSystem es = eigensystem(s, tol);
        for (std::size_t i = 0; i < es.n; ++i) {
            const std::vector<cplx> phi = es.phis.column(i);
            const ComplexMatrix& a = es.coeff_mats[i];
            CHECK(max_abs_diff(a * a.dagger(), contract_trace_b(phi, 2, 3)) <= 1e-12);
            CHECK(max_abs_diff(a.dagger() * a, contract_trace_a(phi, 2, 3).conjugate()) <= 1e-12);
        }
    }
}

TEST_CASE("validate_tripartite rejects unnormalized vectors") {
    const Tolerance tol;
    std::vector<cplx> psi(8, 0.0);
    psi[0] = 2.0;
    CHECK_THROWS_AS(validate_tripartite(psi, 2, 2, 2, tol), ValidationError);
    CHECK_THROWS_AS(validate_tripartite(std::vector<cplx>(7, 0.0), 2, 2, 2, tol), ValidationError);
}
