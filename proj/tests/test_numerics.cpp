#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lueq/errors.hpp"
#include "lueq/numerics.hpp"
#include "lueq/prng.hpp"
#include "lueq/testkit.hpp"
#include "test_support.hpp"

using namespace lueq;

namespace {

ComplexMatrix random_hermitian(std::size_t n, std::uint64_t seed) {
    Prng prng(seed);
    ComplexMatrix g(n, n);
    for (auto& e : g.entries()) e = prng.complex_normal();
    return cplx(0.5, 0.0) * (g + g.dagger());
}

ComplexMatrix random_complex(std::size_t r, std::size_t c, std::uint64_t seed) {
    Prng prng(seed);
    ComplexMatrix g(r, c);
    for (auto& e : g.entries()) e = prng.complex_normal();
    return g;
}

double svd_reconstruction_residual(const ComplexMatrix& m, const SvdResult& f) {
    ComplexMatrix sigma(m.rows(), m.cols());
    for (std::size_t i = 0; i < f.s.size(); ++i) sigma(i, i) = f.s[i];
    return (m - f.u * sigma * f.v.dagger()).frobenius_norm();
}

}  // namespace

TEST_CASE("hermitian_eig on the identity") {
    const Tolerance tol;
    const EigResult r = hermitian_eig(ComplexMatrix::identity(2), tol);
    CHECK(r.values[0] == doctest::Approx(1.0));
    CHECK(r.values[1] == doctest::Approx(1.0));
    CHECK(test::is_unitary(r.vectors, 1e-12));
}

TEST_CASE("hermitian_eig on diag(0.7, 0.3)") {
    const Tolerance tol;
    const EigResult r = hermitian_eig(ComplexMatrix::diagonal(std::vector<double>{0.7, 0.3}), tol);
    CHECK(r.values[0] == doctest::Approx(0.7));
    CHECK(r.values[1] == doctest::Approx(0.3));
    // identity up to phase
    CHECK(std::abs(r.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(r.vectors(1, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(r.vectors(0, 1)) == doctest::Approx(0.0));
}

TEST_CASE("hermitian_eig reconstructs random Hermitian matrices") {
    const Tolerance tol;
    for (std::uint64_t seed = 1; seed <= 24; ++seed) {
        const std::size_t n = 2 + seed % 8;  // up to 9x9
        const ComplexMatrix h = random_hermitian(n, seed);
        const EigResult r = hermitian_eig(h, tol);
        CHECK(test::reconstruction_residual(h, r.values, r.vectors) <=
              1e-10 * std::max(1.0, h.frobenius_norm()));
        CHECK(max_abs_diff(r.vectors.dagger() * r.vectors, ComplexMatrix::identity(n)) <= 1e-12);
        for (std::size_t i = 0; i + 1 < n; ++i) CHECK(r.values[i] >= r.values[i + 1]);
    }
}

TEST_CASE("hermitian_eig rejects bad inputs") {
    const Tolerance tol;
    CHECK_THROWS_AS(hermitian_eig(ComplexMatrix(2, 3), tol), NonSquareError);
    ComplexMatrix m(2, 2);
    m(0, 1) = 1.0;  // not Hermitian
    CHECK_THROWS_AS(hermitian_eig(m, tol), NonHermitianError);
}

TEST_CASE("svd of the zero matrix") {
    const SvdResult f = svd(ComplexMatrix(3, 2));
    for (const double s : f.s) CHECK(s == 0.0);
    CHECK(test::is_unitary(f.u, 1e-12));
    CHECK(test::is_unitary(f.v, 1e-12));
}

TEST_CASE("svd of diag(3, 1)") {
    const SvdResult f = svd(ComplexMatrix::diagonal(std::vector<double>{3.0, 1.0}));
    CHECK(f.s[0] == doctest::Approx(3.0));
    CHECK(f.s[1] == doctest::Approx(1.0));
    CHECK(std::abs(f.u(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(f.v(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("svd singular values match the m^dag m eigenvalue route") {
    const Tolerance tol;
    const ComplexMatrix m = random_complex(3, 2, 77);
    const SvdResult f = svd(m);
    const EigResult gram = hermitian_eig(m.dagger() * m, tol);
    for (std::size_t i = 0; i < f.s.size(); ++i)
        CHECK(f.s[i] == doctest::Approx(std::sqrt(std::max(gram.values[i], 0.0))).epsilon(1e-10));
}

TEST_CASE("svd reconstruction and orthogonality on random shapes") {
    for (std::uint64_t seed = 10; seed < 30; ++seed) {
        const std::size_t r = 1 + seed % 5;
        const std::size_t c = 1 + (seed / 2) % 5;
        const ComplexMatrix m = random_complex(r, c, seed);
        const SvdResult f = svd(m);
        CHECK(svd_reconstruction_residual(m, f) <= 1e-10 * std::max(1.0, m.frobenius_norm()));
        CHECK(test::is_unitary(f.u, 1e-12));
        CHECK(test::is_unitary(f.v, 1e-12));
        for (std::size_t i = 0; i + 1 < f.s.size(); ++i) CHECK(f.s[i] >= f.s[i + 1]);
        for (const double s : f.s) CHECK(s >= 0.0);
    }
}

TEST_CASE("svd handles rank deficiency") {
    // rank-1: outer product
    ComplexMatrix m(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = cplx(1.0 + double(i), 0.5) * cplx(0.3 * double(j + 1), -0.2);
    const SvdResult f = svd(m);
    CHECK(svd_reconstruction_residual(m, f) <= 1e-10 * m.frobenius_norm());
    CHECK(f.s[1] <= 1e-10 * f.s[0]);
    CHECK(test::is_unitary(f.u, 1e-12));
}

TEST_CASE("det of the identity and known matrices") {
    CHECK(std::abs(det(ComplexMatrix::identity(3)) - cplx(1.0, 0.0)) <= 1e-14);
    // 2x2 oracle: ad - bc
    const ComplexMatrix m = ComplexMatrix::from_rows({{cplx(1, 2), cplx(3, -1)}, {cplx(0, 1), cplx(2, 2)}});
    const cplx expected = cplx(1, 2) * cplx(2, 2) - cplx(3, -1) * cplx(0, 1);
    CHECK(std::abs(det(m) - expected) <= 1e-12);
    CHECK_THROWS_AS(det(ComplexMatrix(2, 3)), NonSquareError);
}

TEST_CASE("det multiplicativity against random products") {
    for (std::uint64_t seed = 3; seed < 9; ++seed) {
        const ComplexMatrix a = random_complex(4, 4, seed);
        const ComplexMatrix b = random_complex(4, 4, seed + 100);
        const cplx lhs = det(a * b);
        const cplx rhs = det(a) * det(b);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("rank thresholding") {
    Tolerance tol;
    tol.eps_zero = 1e-9;
    CHECK(rank(ComplexMatrix::diagonal(std::vector<double>{1.0, 1e-15}), tol) == 1);
    CHECK(rank(ComplexMatrix::diagonal(std::vector<double>{1.0, 1e-3}), tol) == 2);
    CHECK(rank(ComplexMatrix(3, 3), tol) == 0);
}

TEST_CASE("rank is invariant under unitary factors") {
    const Tolerance tol;
    for (std::uint64_t seed = 5; seed < 11; ++seed) {
        ComplexMatrix m = random_complex(4, 4, seed);
        // Make it rank 2 by zeroing two singular directions.
        SvdResult f = svd(m);
        ComplexMatrix sigma(4, 4);
        sigma(0, 0) = f.s[0];
        sigma(1, 1) = f.s[1];
        m = f.u * sigma * f.v.dagger();
        const ComplexMatrix u = testkit::haar_unitary(4, seed * 13 + 1);
        const ComplexMatrix v = testkit::haar_unitary(4, seed * 17 + 2);
        CHECK(rank(m, tol) == 2);
        CHECK(rank(u * m * v, tol) == 2);
    }
}

TEST_CASE("commutator of diagonal matrices vanishes") {
    const ComplexMatrix a = ComplexMatrix::diagonal(std::vector<double>{1.0, 2.0});
    const ComplexMatrix b = ComplexMatrix::diagonal(std::vector<double>{-3.0, 0.25});
    CHECK(commutator(a, b).frobenius_norm() == 0.0);
    CHECK_THROWS_AS(commutator(ComplexMatrix(2, 3), ComplexMatrix(3, 2)), NonSquareError);
}

TEST_CASE("trace cyclicity property") {
    for (std::uint64_t seed = 21; seed < 29; ++seed) {
        const std::size_t n = 2 + seed % 4;
        const ComplexMatrix a = random_complex(n, n, seed);
        const ComplexMatrix b = random_complex(n, n, seed + 57);
        const cplx lhs = (a * b).trace();
        const cplx rhs = (b * a).trace();
        CHECK(std::abs(lhs - rhs) <= 1e-12 * a.frobenius_norm() * b.frobenius_norm());
    }
}

TEST_CASE("polar_unitary returns the closest unitary") {
    for (std::uint64_t seed = 2; seed < 8; ++seed) {
        const ComplexMatrix m = random_complex(3, 3, seed);
        const ComplexMatrix q = polar_unitary(m);
        CHECK(test::is_unitary(q, 1e-11));
        // For m = q h with h positive, q^dag m must be Hermitian PSD.
        const ComplexMatrix h = q.dagger() * m;
        CHECK(h.is_hermitian(1e-9));
    }
}

TEST_CASE("kron matches the composite index convention") {
    const ComplexMatrix a = ComplexMatrix::from_rows({{cplx(1, 0), cplx(2, 0)}, {cplx(0, 1), cplx(0, 0)}});
    const ComplexMatrix b = ComplexMatrix::from_rows({{cplx(3, 0), cplx(0, 0)}, {cplx(1, 1), cplx(-1, 0)}});
    const ComplexMatrix k = kron(a, b);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t p = 0; p < 2; ++p)
                for (std::size_t q = 0; q < 2; ++q)
                    CHECK(std::abs(k(i * 2 + p, j * 2 + q) - a(i, j) * b(p, q)) == 0.0);
}
