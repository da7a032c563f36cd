#include "lueq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lueq/errors.hpp"

namespace lueq {

namespace {

double off_diagonal_norm(const ComplexMatrix& m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j) sum += std::norm(m(i, j));
    return std::sqrt(sum);
}

/// One Jacobi rotation zeroing w(p,q), accumulated into v. w Hermitian.
void jacobi_rotate(ComplexMatrix& w, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const cplx apq = w(p, q);
    const double r = std::abs(apq);
    if (r == 0.0) return;
    const cplx e = apq / r;  // exp(i arg(apq))
    const double app = w(p, p).real();
    const double aqq = w(q, q).real();

    const double tau = (aqq - app) / (2.0 * r);
    const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                  : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const std::size_t n = w.rows();
    for (std::size_t k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        const cplx wkp = w(k, p);
        const cplx wkq = w(k, q);
        w(k, p) = c * wkp - s * std::conj(e) * wkq;
        w(k, q) = s * e * wkp + c * wkq;
        w(p, k) = std::conj(w(k, p));
        w(q, k) = std::conj(w(k, q));
    }
    w(p, p) = c * c * app + s * s * aqq - 2.0 * r * s * c;
    w(q, q) = s * s * app + c * c * aqq + 2.0 * r * s * c;
    w(p, q) = 0.0;
    w(q, p) = 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        const cplx vkp = v(k, p);
        const cplx vkq = v(k, q);
        v(k, p) = c * vkp - s * std::conj(e) * vkq;
        v(k, q) = s * e * vkp + c * vkq;
    }
}

/// Multiply column j by the phase making its largest-magnitude entry real positive.
void canonicalize_column_phase(ComplexMatrix& m, std::size_t j) {
    std::size_t best = 0;
    double best_abs = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double a = std::abs(m(i, j));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    if (best_abs == 0.0) return;
    m.scale_column(j, std::conj(m(best, j)) / best_abs);
}

}  // namespace

EigResult hermitian_eig(const ComplexMatrix& m, const Tolerance& tol) {
    if (!m.is_square()) {
        throw NonSquareError("hermitian_eig requires a square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (!m.is_finite()) throw Error("hermitian_eig: non-finite entries");
    if (!m.is_hermitian(tol.eps_zero)) {
        throw NonHermitianError("matrix is not Hermitian within eps_zero=" +
                                std::to_string(tol.eps_zero));
    }

    const std::size_t n = m.rows();
    // Work on the symmetrized copy so eps-level asymmetry cannot bias the sweep.
    ComplexMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));

    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(w.frobenius_norm(), 1e-300);
    const double target = 1e-14 * scale;
    const double skip = 1e-18 * scale;

    for (int sweep = 0; sweep < 64; ++sweep) {
        if (off_diagonal_norm(w) <= target) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(w(p, q)) > skip) jacobi_rotate(w, v, p, q);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return w(a, a).real() > w(b, b).real();
    });

    EigResult out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = w(order[k], order[k]).real();
        out.vectors.set_column(k, v.column(order[k]));
    }
    return out;
}

SvdResult svd(const ComplexMatrix& m) {
    const std::size_t r = m.rows();
    const std::size_t c = m.cols();
    const std::size_t k = std::min(r, c);
    const Tolerance tol;  // defaults; the Hermitian gate is trivially met below

    SvdResult out;
    out.s.assign(k, 0.0);

    EigResult right = hermitian_eig(m.dagger() * m, tol);
    out.v = right.vectors;
    for (std::size_t j = 0; j < c; ++j) canonicalize_column_phase(out.v, j);

    // The squared problem caps small-value accuracy at sqrt(eps) * s_max;
    // ||m v_k|| recovers them to full absolute precision.
    std::vector<double> refined(c, 0.0);
    for (std::size_t j = 0; j < c; ++j) {
        const std::vector<cplx> vj = out.v.column(j);
        double sum = 0.0;
        for (std::size_t a = 0; a < r; ++a) {
            cplx acc = 0.0;
            for (std::size_t b = 0; b < c; ++b) acc += m(a, b) * vj[b];
            sum += std::norm(acc);
        }
        refined[j] = std::sqrt(sum);
    }
    // Refinement can reorder near-equal values; restore descending order.
    std::vector<std::size_t> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&refined](std::size_t a, std::size_t b) { return refined[a] > refined[b]; });
    {
        ComplexMatrix sorted_v(c, c);
        for (std::size_t j = 0; j < c; ++j) sorted_v.set_column(j, out.v.column(order[j]));
        out.v = sorted_v;
        std::vector<double> sorted_s(c);
        for (std::size_t j = 0; j < c; ++j) sorted_s[j] = refined[order[j]];
        refined = std::move(sorted_s);
    }
    for (std::size_t i = 0; i < k; ++i) out.s[i] = refined[i];

    const double cut = (out.s.empty() ? 0.0 : out.s[0]) * 1e-13;

    out.u = ComplexMatrix(r, r);
    std::vector<std::vector<cplx>> ucols;
    ucols.reserve(r);
    for (std::size_t i = 0; i < k && out.s[i] > cut; ++i) {
        std::vector<cplx> ui(r, 0.0);
        const std::vector<cplx> vi = out.v.column(i);
        for (std::size_t a = 0; a < r; ++a) {
            cplx acc = 0.0;
            for (std::size_t b = 0; b < c; ++b) acc += m(a, b) * vi[b];
            ui[a] = acc / out.s[i];
        }
        // Re-orthogonalize against earlier columns; tiny singular values can
        // leak a little of their neighbours.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& prev : ucols) {
                cplx overlap = 0.0;
                for (std::size_t a = 0; a < r; ++a) overlap += std::conj(prev[a]) * ui[a];
                for (std::size_t a = 0; a < r; ++a) ui[a] -= overlap * prev[a];
            }
        }
        double norm = 0.0;
        for (const auto& x : ui) norm += std::norm(x);
        norm = std::sqrt(norm);
        if (norm < 0.5) break;  // fall through to kernel completion
        for (auto& x : ui) x /= norm;
        ucols.push_back(std::move(ui));
    }

    if (ucols.size() < r) {
        // Kernel columns come from the small end of the m m^dag spectrum.
        EigResult left = hermitian_eig(m * m.dagger(), tol);
        ComplexMatrix lv = left.vectors;
        for (std::size_t j = 0; j < r; ++j) canonicalize_column_phase(lv, j);
        for (std::size_t jj = r; jj-- > 0 && ucols.size() < r;) {
            std::vector<cplx> cand = lv.column(jj);
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& prev : ucols) {
                    cplx overlap = 0.0;
                    for (std::size_t a = 0; a < r; ++a) overlap += std::conj(prev[a]) * cand[a];
                    for (std::size_t a = 0; a < r; ++a) cand[a] -= overlap * prev[a];
                }
            }
            double norm = 0.0;
            for (const auto& x : cand) norm += std::norm(x);
            norm = std::sqrt(norm);
            if (norm < 0.3) continue;
            for (auto& x : cand) x /= norm;
            ucols.push_back(std::move(cand));
        }
    }
    if (ucols.size() != r) throw Error("svd: left factor completion failed");
    for (std::size_t j = 0; j < r; ++j) out.u.set_column(j, ucols[j]);
    return out;
}

std::vector<double> singular_values(const ComplexMatrix& m) {
    const std::size_t r = m.rows();
    const std::size_t c = m.cols();
    const std::size_t k = std::min(r, c);
    EigResult right = hermitian_eig(m.dagger() * m, Tolerance{});
    std::vector<double> s(c);
    for (std::size_t j = 0; j < c; ++j) {
        const std::vector<cplx> vj = right.vectors.column(j);
        double sum = 0.0;
        for (std::size_t a = 0; a < r; ++a) {
            cplx acc = 0.0;
            for (std::size_t b = 0; b < c; ++b) acc += m(a, b) * vj[b];
            sum += std::norm(acc);
        }
        s[j] = std::sqrt(sum);
    }
    std::sort(s.begin(), s.end(), std::greater<double>());
    s.resize(k);
    return s;
}

cplx det(const ComplexMatrix& m) {
    if (!m.is_square()) {
        throw NonSquareError("det requires a square matrix, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
    const std::size_t n = m.rows();
    if (n == 0) return 1.0;
    ComplexMatrix a = m;
    cplx d = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            const double cand = std::abs(a(i, col));
            if (cand > best) {
                best = cand;
                pivot = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            d = -d;
        }
        d *= a(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            const cplx f = a(i, col) / a(col, col);
            if (f == cplx(0.0, 0.0)) continue;
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
        }
    }
    return d;
}

std::size_t rank(const ComplexMatrix& m, const Tolerance& tol) {
    const std::vector<double> s = singular_values(m);
    if (s.empty()) return 0;
    const double cut = tol.eps_zero * s[0];
    std::size_t r = 0;
    for (const double x : s)
        if (x > cut && x > 0.0) ++r;
    return r;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.is_square() || !b.is_square())
        throw NonSquareError("commutator requires square matrices");
    return a * b - b * a;
}

ComplexMatrix polar_unitary(const ComplexMatrix& m) {
    if (!m.is_square()) throw NonSquareError("polar_unitary requires a square matrix");
    SvdResult f = svd(m);
    return f.u * f.v.dagger();
}

cplx leading_block_det(const ComplexMatrix& m, std::size_t k) {
    if (k > m.rows() || k > m.cols()) throw DimensionMismatchError("leading block exceeds matrix");
    ComplexMatrix block(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) block(i, j) = m(i, j);
    return det(block);
}

}  // namespace lueq
