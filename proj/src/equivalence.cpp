#include "lueq/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lueq/errors.hpp"
#include "lueq/numerics.hpp"
#include "lueq/prng.hpp"

namespace lueq {

namespace {

double off_diag_mass(const ComplexMatrix& m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j) sum += std::norm(m(i, j));
    return std::sqrt(sum);
}

ComplexMatrix random_unitary_local(std::size_t dim, Prng& prng) {
    ComplexMatrix g(dim, dim);
    for (auto& e : g.entries()) e = prng.complex_normal();
    return polar_unitary(g);
}

/// Greedy column matching between two joint-eigenvalue tables. Returns, for
/// each column k of the first table, the matched column of the second, or
/// nothing if some column has no partner within key_tol.
std::optional<std::vector<std::size_t>> match_key_columns(
    const std::vector<std::vector<double>>& e1, const std::vector<std::vector<double>>& e2,
    double key_tol) {
    const std::size_t n = e1.size();
    const std::size_t d = e1.empty() ? 0 : e1[0].size();
    std::vector<std::size_t> map(d, 0);
    std::vector<bool> used(d, false);
    for (std::size_t k = 0; k < d; ++k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = d;
        for (std::size_t kp = 0; kp < d; ++kp) {
            if (used[kp]) continue;
            double cost = 0.0;
            for (std::size_t j = 0; j < n; ++j) cost = std::max(cost, std::abs(e1[j][k] - e2[j][kp]));
            if (cost < best) {
                best = cost;
                best_idx = kp;
            }
        }
        if (best_idx == d || best > key_tol) return std::nullopt;
        used[best_idx] = true;
        map[k] = best_idx;
    }
    return map;
}

/// Columns grouped by identical joint keys (within group_tol on every member).
std::vector<std::vector<std::size_t>> joint_key_groups(
    const std::vector<std::vector<double>>& table, double group_tol) {
    const std::size_t n = table.size();
    const std::size_t d = table.empty() ? 0 : table[0].size();
    std::vector<std::vector<std::size_t>> groups;
    std::vector<bool> assigned(d, false);
    for (std::size_t k = 0; k < d; ++k) {
        if (assigned[k]) continue;
        std::vector<std::size_t> group{k};
        assigned[k] = true;
        for (std::size_t k2 = k + 1; k2 < d; ++k2) {
            if (assigned[k2]) continue;
            double dist = 0.0;
            for (std::size_t j = 0; j < n; ++j) dist = std::max(dist, std::abs(table[j][k] - table[j][k2]));
            if (dist <= group_tol) {
                group.push_back(k2);
                assigned[k2] = true;
            }
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

struct PhaseSolve {
    std::vector<double> alpha;  // per family index
    std::vector<double> mu;     // per left basis column
    std::vector<double> nu;     // per right basis column
};

/// Solve arg(bp) - arg(b) = alpha_j - mu_k + nu_l over the significant
/// entries. Propagation solves every equation that is down to one unknown;
/// at a deadlock exactly one free variable is pinned to zero (each such pin
/// consumes one genuine gauge/slack dimension). Gauss-Seidel sweeps on the
/// circle then reconcile whatever cycle constraints propagation cannot see.
PhaseSolve solve_phases(const std::vector<ComplexMatrix>& b, const std::vector<ComplexMatrix>& bp) {
    const std::size_t n = b.size();
    const std::size_t ra = n == 0 ? 0 : b[0].rows();
    const std::size_t rb = n == 0 ? 0 : b[0].cols();

    PhaseSolve ps;
    ps.alpha.assign(n, 0.0);
    ps.mu.assign(ra, 0.0);
    ps.nu.assign(rb, 0.0);
    std::vector<bool> ka(n, false), km(ra, false), kn(rb, false);

    double max_entry = 0.0;
    for (const auto& m : b) max_entry = std::max(max_entry, m.max_abs());
    const double tau = std::max(1e-8, 1e-5 * max_entry);

    struct Entry {
        std::size_t j, k, l;
        double weight;
        double delta;
    };
    std::vector<Entry> entries;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < ra; ++k)
            for (std::size_t l = 0; l < rb; ++l) {
                const double wb = std::abs(b[j](k, l));
                const double wp = std::abs(bp[j](k, l));
                if (wb > tau && wp > 0.5 * tau) {
                    entries.push_back(
                        {j, k, l, std::min(wb, wp), std::arg(bp[j](k, l)) - std::arg(b[j](k, l))});
                }
            }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.weight > b.weight; });

    const auto unknowns = [&](const Entry& e) {
        return 3 - int(ka[e.j]) - int(km[e.k]) - int(kn[e.l]);
    };

    while (true) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (const Entry& e : entries) {
                if (unknowns(e) != 1) continue;
                // delta = alpha - mu + nu
                if (!ka[e.j]) {
                    ps.alpha[e.j] = e.delta + ps.mu[e.k] - ps.nu[e.l];
                    ka[e.j] = true;
                } else if (!km[e.k]) {
                    ps.mu[e.k] = ps.alpha[e.j] + ps.nu[e.l] - e.delta;
                    km[e.k] = true;
                } else {
                    ps.nu[e.l] = e.delta - ps.alpha[e.j] + ps.mu[e.k];
                    kn[e.l] = true;
                }
                progress = true;
            }
        }
        // Deadlocked: pin one still-free variable of the heaviest unresolved
        // equation (entries are sorted by weight).
        const Entry* pick = nullptr;
        for (const Entry& e : entries) {
            if (unknowns(e) >= 1 && (pick == nullptr || unknowns(e) < unknowns(*pick))) {
                pick = &e;
                if (unknowns(*pick) == 1) break;
            }
        }
        if (pick == nullptr) break;
        if (!kn[pick->l]) {
            kn[pick->l] = true;  // nu errors are absorbed later by the m-step
        } else if (!km[pick->k]) {
            km[pick->k] = true;
        } else {
            ka[pick->j] = true;
        }
    }

    // Circular Gauss-Seidel polish over the full system.
    for (int sweep = 0; sweep < 40; ++sweep) {
        double moved = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc = 0.0;
            for (const Entry& e : entries)
                if (e.j == j) acc += e.weight * std::polar(1.0, e.delta + ps.mu[e.k] - ps.nu[e.l]);
            if (std::abs(acc) > 0.0) {
                const double next = std::arg(acc);
                moved = std::max(moved, std::abs(std::remainder(next - ps.alpha[j], 2.0 * M_PI)));
                ps.alpha[j] = next;
            }
        }
        for (std::size_t k = 0; k < ra; ++k) {
            cplx acc = 0.0;
            for (const Entry& e : entries)
                if (e.k == k) acc += e.weight * std::polar(1.0, ps.alpha[e.j] + ps.nu[e.l] - e.delta);
            if (std::abs(acc) > 0.0) {
                const double next = std::arg(acc);
                moved = std::max(moved, std::abs(std::remainder(next - ps.mu[k], 2.0 * M_PI)));
                ps.mu[k] = next;
            }
        }
        for (std::size_t l = 0; l < rb; ++l) {
            cplx acc = 0.0;
            for (const Entry& e : entries)
                if (e.l == l) acc += e.weight * std::polar(1.0, e.delta - ps.alpha[e.j] + ps.mu[e.k]);
            if (std::abs(acc) > 0.0) {
                const double next = std::arg(acc);
                moved = std::max(moved, std::abs(std::remainder(next - ps.nu[l], 2.0 * M_PI)));
                ps.nu[l] = next;
            }
        }
        if (moved < 1e-13) break;
    }
    return ps;
}

struct AlignmentProblem {
    const std::vector<ComplexMatrix>& a;   // coefficient matrices of state 1
    const std::vector<ComplexMatrix>& ap;  // reordered coefficient matrices of state 2
};

double aligned_residual(const AlignmentProblem& prob, const ComplexMatrix& u,
                        const ComplexMatrix& m, std::size_t j) {
    const ComplexMatrix b = u * prob.a[j] * m;
    const cplx overlap = hs_inner(b, prob.ap[j]);
    const double phase = std::abs(overlap) == 0.0 ? 0.0 : std::arg(overlap);
    const ComplexMatrix diff = prob.ap[j] - std::polar(1.0, phase) * b;
    return diff.frobenius_norm();
}

double worst_aligned_residual(const AlignmentProblem& prob, const ComplexMatrix& u,
                              const ComplexMatrix& m) {
    double worst = 0.0;
    for (std::size_t j = 0; j < prob.a.size(); ++j)
        worst = std::max(worst, aligned_residual(prob, u, m, j));
    return worst;
}

/// Alternating unitary Procrustes over (u, m) with per-index phase alignment.
void alternate_refine(const AlignmentProblem& prob, ComplexMatrix& u, ComplexMatrix& m,
                      int max_iters) {
    const std::size_t n = prob.a.size();
    const std::size_t na = u.rows();
    const std::size_t nb = m.rows();
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        // Optimal m given u (and phases given both).
        ComplexMatrix acc_m(nb, nb);
        for (std::size_t j = 0; j < n; ++j) {
            const ComplexMatrix ua = u * prob.a[j];
            const cplx overlap = hs_inner(ua * m, prob.ap[j]);
            const double beta = std::abs(overlap) == 0.0 ? 0.0 : std::arg(overlap);
            acc_m += std::polar(1.0, -beta) * (ua.dagger() * prob.ap[j]);
        }
        m = polar_unitary(acc_m);

        // Optimal u given m.
        ComplexMatrix acc_u(na, na);
        for (std::size_t j = 0; j < n; ++j) {
            const ComplexMatrix am = prob.a[j] * m;
            const cplx overlap = hs_inner(u * am, prob.ap[j]);
            const double beta = std::abs(overlap) == 0.0 ? 0.0 : std::arg(overlap);
            acc_u += std::polar(1.0, -beta) * (prob.ap[j] * am.dagger());
        }
        u = polar_unitary(acc_u);

        const double worst = worst_aligned_residual(prob, u, m);
        if (worst < 1e-13) break;
        if (prev - worst < 1e-4 * worst) break;
        prev = worst;
    }
}

struct FamilyBases {
    SimDiagResult p;   // common eigenbasis of {rho_j}
    SimDiagResult pp;  // of {rho'_j}
    SimDiagResult q;   // of {theta_j}
    SimDiagResult qp;  // of {theta'_j}
};

ComplexMatrix permute_columns(const ComplexMatrix& m, const std::vector<std::size_t>& map) {
    ComplexMatrix out(m.rows(), map.size());
    for (std::size_t k = 0; k < map.size(); ++k) out.set_column(k, m.column(map[k]));
    return out;
}

std::optional<InvariantMismatch> compare_metric(const ComplexMatrix& m1, const ComplexMatrix& m2,
                                                const std::vector<std::size_t>& perm,
                                                std::size_t n, double eps, const char* name,
                                                const std::function<bool(std::size_t, std::size_t)>& keep) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (keep && !keep(i, j)) continue;
            const cplx lhs = m1(i, j);
            const cplx rhs = m2(perm[i], perm[j]);
            if (std::abs(lhs - rhs) > eps) return InvariantMismatch{name, {i, j}, lhs, rhs};
        }
    return std::nullopt;
}

std::optional<InvariantMismatch> compare_tensor(
    const Tensor3& t1, const Tensor3& t2, const std::vector<std::size_t>& perm, double eps,
    const char* name, const std::function<bool(std::size_t, std::size_t, std::size_t)>& keep) {
    for (std::size_t i = 0; i < t1.n; ++i)
        for (std::size_t j = 0; j < t1.n; ++j)
            for (std::size_t k = 0; k < t1.n; ++k) {
                if (keep && !keep(i, j, k)) continue;
                const cplx lhs = t1.at(i, j, k);
                const cplx rhs = t2.at(perm[i], perm[j], perm[k]);
                if (std::abs(lhs - rhs) > eps) return InvariantMismatch{name, {i, j, k}, lhs, rhs};
            }
    return std::nullopt;
}

bool spectrum_nondegenerate(const EigenSystem& es) {
    for (const auto& block : es.degeneracy_blocks)
        if (block.second - block.first > 1) return false;
    return true;
}

InvariantMismatch spectrum_mismatch(const EigenSystem& es1, const EigenSystem& es2,
                                    const Tolerance& tol) {
    for (std::size_t i = 0; i < std::min(es1.n, es2.n); ++i) {
        if (std::abs(es1.lambdas[i] - es2.lambdas[i]) > tol.eps_eig) {
            return InvariantMismatch{"spectrum", {i}, es1.lambdas[i], es2.lambdas[i]};
        }
    }
    return InvariantMismatch{"spectrum", {}, cplx(double(es1.n), 0.0), cplx(double(es2.n), 0.0)};
}

}  // namespace

std::string to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Equivalent: return "equivalent";
        case VerdictKind::Inequivalent: return "inequivalent";
        case VerdictKind::Inconclusive: return "inconclusive";
        case VerdictKind::Conditional: return "conditional";
    }
    return "?";
}

std::string InvariantMismatch::describe() const {
    std::ostringstream os;
    os << invariant;
    if (!indices.empty()) {
        os << "[";
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (i) os << "][";
            os << indices[i] + 1;  // 1-based in human-facing text
        }
        os << "]";
    }
    os << ": " << lhs.real();
    if (std::abs(lhs.imag()) > 1e-12) os << (lhs.imag() < 0 ? "-" : "+") << std::abs(lhs.imag()) << "i";
    os << " vs " << rhs.real();
    if (std::abs(rhs.imag()) > 1e-12) os << (rhs.imag() < 0 ? "-" : "+") << std::abs(rhs.imag()) << "i";
    return os.str();
}

std::vector<OrderingCandidate> ordering_candidates(const EigenSystem& a, const EigenSystem& b,
                                                   const Tolerance& tol,
                                                   std::size_t max_orderings) {
    if (a.n != b.n) return {};
    if (a.degeneracy_blocks.size() != b.degeneracy_blocks.size()) return {};
    for (std::size_t i = 0; i < a.degeneracy_blocks.size(); ++i) {
        const auto& ba = a.degeneracy_blocks[i];
        const auto& bb = b.degeneracy_blocks[i];
        if (ba.second - ba.first != bb.second - bb.first) return {};
    }
    for (std::size_t i = 0; i < a.n; ++i)
        if (std::abs(a.lambdas[i] - b.lambdas[i]) > tol.eps_eig) return {};

    // Count before materializing.
    std::size_t count = 1;
    for (const auto& block : a.degeneracy_blocks) {
        const std::size_t size = block.second - block.first;
        for (std::size_t f = 2; f <= size; ++f) {
            if (count > max_orderings / f) {
                throw TooManyOrderingsError("ordering candidate count exceeds cap", 0, max_orderings);
            }
            count *= f;
        }
    }
    if (count > max_orderings) {
        throw TooManyOrderingsError("ordering candidate count exceeds cap", count, max_orderings);
    }

    std::vector<std::vector<std::vector<std::size_t>>> block_perms;
    for (const auto& block : a.degeneracy_blocks) {
        std::vector<std::size_t> idx(block.second - block.first);
        std::iota(idx.begin(), idx.end(), block.first);
        std::vector<std::vector<std::size_t>> perms;
        std::vector<std::size_t> p = idx;
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
        block_perms.push_back(std::move(perms));
    }

    std::vector<OrderingCandidate> out;
    out.reserve(count);
    std::vector<std::size_t> choice(block_perms.size(), 0);
    while (true) {
        OrderingCandidate cand;
        cand.perm.resize(a.n);
        for (std::size_t bi = 0; bi < block_perms.size(); ++bi) {
            const auto& block = a.degeneracy_blocks[bi];
            const auto& perm = block_perms[bi][choice[bi]];
            for (std::size_t off = 0; off < perm.size(); ++off) cand.perm[block.first + off] = perm[off];
        }
        out.push_back(std::move(cand));
        std::size_t bi = 0;
        while (bi < choice.size()) {
            if (++choice[bi] < block_perms[bi].size()) break;
            choice[bi] = 0;
            ++bi;
        }
        if (bi == choice.size()) break;
    }
    return out;
}

SimDiagResult simultaneous_diagonalize(const std::vector<ComplexMatrix>& family,
                                       const Tolerance& tol, std::uint64_t seed) {
    if (family.empty()) throw Error("simultaneous_diagonalize: empty family");
    const std::size_t d = family[0].rows();
    double family_scale = 0.0;
    for (const auto& h : family) family_scale = std::max(family_scale, h.frobenius_norm());

    Prng prng(seed);
    SimDiagResult best;
    best.off_residual = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt < 3; ++attempt) {
        std::vector<double> weights(family.size());
        for (auto& c : weights) c = prng.uniform(1.0, 2.0);

        ComplexMatrix r1(d, d);
        for (std::size_t j = 0; j < family.size(); ++j) r1 += cplx(weights[j], 0.0) * family[j];
        EigResult eig1 = hermitian_eig(r1, tol);
        ComplexMatrix basis = eig1.vectors;

        // Refine within near-degenerate subspaces of the first combination.
        std::vector<std::pair<std::size_t, std::size_t>> groups;
        std::size_t begin = 0;
        const double gap_tol = std::max(1e-10, 1e-8 * std::max(1.0, family_scale));
        for (std::size_t i = 0; i < d; ++i) {
            if (i + 1 == d || eig1.values[i] - eig1.values[i + 1] > gap_tol) {
                groups.emplace_back(begin, i + 1);
                begin = i + 1;
            }
        }
        for (const auto& group : groups) {
            const std::size_t g = group.second - group.first;
            if (g <= 1) continue;
            std::vector<double> w2(family.size());
            for (auto& c : w2) c = prng.uniform(1.0, 2.0);
            ComplexMatrix r2(d, d);
            for (std::size_t j = 0; j < family.size(); ++j) r2 += cplx(w2[j], 0.0) * family[j];
            // Project the second combination into the subspace and diagonalize.
            ComplexMatrix sub(g, g);
            std::vector<std::vector<cplx>> cols;
            for (std::size_t c = 0; c < g; ++c) cols.push_back(basis.column(group.first + c));
            for (std::size_t x = 0; x < g; ++x)
                for (std::size_t y = 0; y < g; ++y) {
                    cplx acc = 0.0;
                    for (std::size_t i = 0; i < d; ++i) {
                        cplx r2col = 0.0;
                        for (std::size_t ii = 0; ii < d; ++ii) r2col += r2(i, ii) * cols[y][ii];
                        acc += std::conj(cols[x][i]) * r2col;
                    }
                    sub(x, y) = acc;
                }
            EigResult sub_eig = hermitian_eig(sub, tol);
            for (std::size_t c = 0; c < g; ++c) {
                std::vector<cplx> newcol(d, 0.0);
                for (std::size_t y = 0; y < g; ++y)
                    for (std::size_t i = 0; i < d; ++i) newcol[i] += cols[y][i] * sub_eig.vectors(y, c);
                basis.set_column(group.first + c, newcol);
            }
        }

        SimDiagResult result;
        result.basis = basis;
        result.table.assign(family.size(), std::vector<double>(d, 0.0));
        result.off_residual = 0.0;
        for (std::size_t j = 0; j < family.size(); ++j) {
            const ComplexMatrix t = basis.dagger() * family[j] * basis;
            for (std::size_t k = 0; k < d; ++k) result.table[j][k] = t(k, k).real();
            result.off_residual = std::max(result.off_residual, off_diag_mass(t));
        }
        if (result.off_residual < best.off_residual) best = std::move(result);
        if (best.off_residual <= 1e-10 * std::max(1.0, family_scale)) break;
    }
    return best;
}

std::optional<Witness> extract_witness(const EigenSystem& es1, const EigenSystem& es2,
                                       const OrderingCandidate& ordering, const Tolerance& tol,
                                       std::uint64_t seed) {
    const std::size_t n = es1.n;
    if (n == 0 || es2.n != n || ordering.perm.size() != n) return std::nullopt;
    if (es1.dim_a != es2.dim_a || es1.dim_b != es2.dim_b) return std::nullopt;
    const std::size_t na = es1.dim_a;
    const std::size_t nb = es1.dim_b;

    std::vector<ComplexMatrix> a(n), ap(n);
    for (std::size_t j = 0; j < n; ++j) {
        a[j] = es1.coeff_mats[j];
        ap[j] = es2.coeff_mats[ordering.perm[j]];
    }

    // The proof's precondition: matching singular values index by index.
    for (std::size_t j = 0; j < n; ++j) {
        const std::vector<double> s1 = singular_values(a[j]);
        const std::vector<double> s2 = singular_values(ap[j]);
        for (std::size_t k = 0; k < s1.size(); ++k)
            if (std::abs(s1[k] - s2[k]) > tol.eps_match) return std::nullopt;
    }

    std::vector<ComplexMatrix> rho(n), rhop(n), th(n), thp(n);
    for (std::size_t j = 0; j < n; ++j) {
        rho[j] = a[j] * a[j].dagger();
        rhop[j] = ap[j] * ap[j].dagger();
        th[j] = a[j].dagger() * a[j];
        thp[j] = ap[j].dagger() * ap[j];
    }

    const SimDiagResult sd_r = simultaneous_diagonalize(rho, tol, seed ^ 0xa11ce5ULL);
    const SimDiagResult sd_rp = simultaneous_diagonalize(rhop, tol, seed ^ 0xa11ce5ULL);
    const SimDiagResult sd_t = simultaneous_diagonalize(th, tol, seed ^ 0xb22df6ULL);
    const SimDiagResult sd_tp = simultaneous_diagonalize(thp, tol, seed ^ 0xb22df6ULL);

    const double key_tol = std::max(tol.eps_match, 1e3 * sd_r.off_residual);
    const auto map_p = match_key_columns(sd_r.table, sd_rp.table, key_tol);
    const auto map_q = match_key_columns(sd_t.table, sd_tp.table, key_tol);

    const AlignmentProblem prob{a, ap};
    Prng retry_prng(seed ^ 0xc33e07ULL);

    // Reference index: the coefficient matrix with the best-separated singular
    // values pins the SVD bases most stably.
    std::size_t ref = 0;
    double best_gap = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::vector<double> s = singular_values(a[j]);
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < s.size(); ++k) gap = std::min(gap, s[k] - s[k + 1]);
        if (!s.empty()) gap = std::min(gap, s.back());
        if (gap > best_gap) {
            best_gap = gap;
            ref = j;
        }
    }

    const int max_attempts = 10;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        ComplexMatrix u0;
        ComplexMatrix m0;
        bool have_m0 = false;

        if (attempt == 0) {
            // Family-aligned bases plus phase synchronization.
            if (!map_p || !map_q) continue;
            const ComplexMatrix pp_aligned = permute_columns(sd_rp.basis, *map_p);
            const ComplexMatrix qp_aligned = permute_columns(sd_tp.basis, *map_q);
            std::vector<ComplexMatrix> b(n), bpm(n);
            for (std::size_t j = 0; j < n; ++j) {
                b[j] = sd_r.basis.dagger() * a[j] * sd_t.basis;
                bpm[j] = pp_aligned.dagger() * ap[j] * qp_aligned;
            }
            const PhaseSolve ps = solve_phases(b, bpm);
            std::vector<cplx> mu_phase(na), nu_phase(nb);
            for (std::size_t k = 0; k < na; ++k) mu_phase[k] = std::polar(1.0, -ps.mu[k]);
            for (std::size_t l = 0; l < nb; ++l) nu_phase[l] = std::polar(1.0, ps.nu[l]);
            u0 = pp_aligned * ComplexMatrix::diagonal(mu_phase) * sd_r.basis.dagger();
            m0 = sd_t.basis * ComplexMatrix::diagonal(nu_phase) * qp_aligned.dagger();
            have_m0 = true;
        } else if (attempt == 1) {
            // Reference-index SVD construction.
            const SvdResult f = svd(a[ref]);
            const SvdResult fp = svd(ap[ref]);
            u0 = fp.u * f.u.dagger();
            m0 = f.v * fp.v.dagger();
            have_m0 = true;
        } else if (attempt == 2) {
            // Theta-side bases first: m from matched right eigenbases, u from
            // its Procrustes step. A different basin from attempt 0.
            if (!map_q) continue;
            const ComplexMatrix qp_aligned = permute_columns(sd_tp.basis, *map_q);
            m0 = sd_t.basis * qp_aligned.dagger();
            ComplexMatrix acc(na, na);
            for (std::size_t j = 0; j < n; ++j) {
                const ComplexMatrix am = a[j] * m0;
                const cplx overlap = hs_inner(am, ap[j]);
                const double beta = std::abs(overlap) == 0.0 ? 0.0 : std::arg(overlap);
                acc += std::polar(1.0, -beta) * (ap[j] * am.dagger());
            }
            u0 = polar_unitary(acc);
            have_m0 = true;
        } else {
            // Randomized block corrections within joint-degenerate groups.
            if (!map_p) continue;
            const ComplexMatrix pp_aligned = permute_columns(sd_rp.basis, *map_p);
            const auto groups = joint_key_groups(sd_r.table, std::max(1e-6, key_tol));
            ComplexMatrix g = ComplexMatrix::identity(na);
            for (const auto& group : groups) {
                if (group.size() == 1) {
                    g(group[0], group[0]) = std::polar(1.0, retry_prng.uniform(0.0, 2.0 * M_PI));
                    continue;
                }
                const ComplexMatrix small = random_unitary_local(group.size(), retry_prng);
                for (std::size_t x = 0; x < group.size(); ++x)
                    for (std::size_t y = 0; y < group.size(); ++y) g(group[x], group[y]) = small(x, y);
            }
            u0 = pp_aligned * g * sd_r.basis.dagger();
        }

        ComplexMatrix u = u0;
        ComplexMatrix m = have_m0 ? m0 : ComplexMatrix::identity(nb);
        if (!have_m0) {
            // First m from the Procrustes step with zero phases.
            ComplexMatrix acc(nb, nb);
            for (std::size_t j = 0; j < n; ++j) acc += (u * a[j]).dagger() * ap[j];
            m = polar_unitary(acc);
        }
        alternate_refine(prob, u, m, 60);

        const double worst = worst_aligned_residual(prob, u, m);
        if (worst <= tol.eps_match) {
            Witness witness;
            witness.u = u;
            witness.w = m.transpose();
            witness.max_coeff_residual = worst;
            const ComplexMatrix k = kron(witness.u, witness.w);
            const ComplexMatrix lhs = reconstruct_density(es2);
            const ComplexMatrix rhs = k * reconstruct_density(es1) * k.dagger();
            witness.residual = (lhs - rhs).frobenius_norm();
            if (witness.residual <= tol.eps_match) return witness;
        }
    }
    return std::nullopt;
}

namespace {

struct Prepared {
    EigenSystem es;
    ReducedFamily rf;
    InvariantSet inv;
    GenericityClass cls;
};

Prepared prepare(const BipartiteState& s, const Tolerance& tol, FullRankMode mode) {
    Prepared p;
    p.es = eigensystem(s, tol);
    p.rf = reduced_family(p.es);
    p.inv = compute_invariants(p.es, p.rf);
    p.cls = classify(p.es, p.rf, p.inv, tol, mode);
    return p;
}

/// Shared invariant-level decision core for bipartite and tripartite paths.
/// Runs rank / J / classification / branch / ordering comparisons and returns
/// a verdict; orderings that pass get handed to `on_ordering_pass` (bipartite
/// witness extraction), which returns an Equivalent verdict or nothing.
struct BranchSelection {
    bool ok = false;
    bool use_omega = true;
    std::string reason;
};

BranchSelection select_branch(const GenericityClass& c1, const GenericityClass& c2,
                              const Tolerance& tol, BranchChoice choice) {
    const bool omega_both =
        std::abs(c1.det_omega_n) > tol.eps_zero && std::abs(c2.det_omega_n) > tol.eps_zero;
    const bool theta_both =
        std::abs(c1.det_theta_n) > tol.eps_zero && std::abs(c2.det_theta_n) > tol.eps_zero;
    BranchSelection sel;
    switch (choice) {
        case BranchChoice::ForceOmega:
            if (!omega_both) {
                sel.reason = "Omega is degenerate on at least one side; forced branch unavailable";
                return sel;
            }
            sel.ok = true;
            sel.use_omega = true;
            return sel;
        case BranchChoice::ForceTheta:
            if (!theta_both) {
                sel.reason = "Theta is degenerate on at least one side; forced branch unavailable";
                return sel;
            }
            sel.ok = true;
            sel.use_omega = false;
            return sel;
        case BranchChoice::Auto:
            if (omega_both) {
                sel.ok = true;
                sel.use_omega = true;
            } else if (theta_both) {
                sel.ok = true;
                sel.use_omega = false;
            } else {
                sel.reason = "neither Omega nor Theta is non-degenerate on both sides";
            }
            return sel;
    }
    return sel;
}

}  // namespace

EquivalenceVerdict decide_bipartite(const BipartiteState& s1, const BipartiteState& s2,
                                    const Tolerance& tol, const DecisionOptions& opts) {
    if (s1.dim_a != s2.dim_a || s1.dim_b != s2.dim_b) {
        throw DimensionMismatchError("states live on different systems");
    }

    EquivalenceVerdict v;
    Prepared p1 = prepare(s1, tol, opts.full_rank_mode);
    Prepared p2 = prepare(s2, tol, opts.full_rank_mode);
    v.class_a = p1.cls;
    v.class_b = p2.cls;

    // Cheapest invariants first.
    if (p1.es.n != p2.es.n) {
        v.kind = VerdictKind::Inequivalent;
        v.mismatch = InvariantMismatch{"rank", {}, cplx(double(p1.es.n), 0.0), cplx(double(p2.es.n), 0.0)};
        return v;
    }
    for (std::size_t s = 0; s < p1.inv.j_moments.size(); ++s) {
        if (std::abs(p1.inv.j_moments[s] - p2.inv.j_moments[s]) > tol.eps_match) {
            v.kind = VerdictKind::Inequivalent;
            v.mismatch = InvariantMismatch{"J", {s}, p1.inv.j_moments[s], p2.inv.j_moments[s]};
            return v;
        }
    }

    const bool nondeg = spectrum_nondegenerate(p1.es) && spectrum_nondegenerate(p2.es);
    const bool both_chg = p1.cls.chg && p2.cls.chg;

    if (both_chg) {
        const BranchSelection sel = select_branch(p1.cls, p2.cls, tol, opts.branch);
        if (!sel.ok) {
            v.kind = VerdictKind::Inconclusive;
            v.reason = sel.reason;
            return v;
        }
        v.branch = sel.use_omega ? "omega" : "theta";

        const std::vector<OrderingCandidate> candidates =
            ordering_candidates(p1.es, p2.es, tol, opts.max_orderings);
        if (candidates.empty()) {
            v.kind = VerdictKind::Inequivalent;
            v.mismatch = spectrum_mismatch(p1.es, p2.es, tol);
            return v;
        }

        std::optional<InvariantMismatch> last_mismatch;
        bool witness_failure = false;
        for (const OrderingCandidate& cand : candidates) {
            std::optional<InvariantMismatch> mm;
            if (sel.use_omega) {
                mm = compare_metric(p1.inv.omega, p2.inv.omega, cand.perm, p1.es.n, tol.eps_match,
                                    "Omega", nullptr);
                if (!mm)
                    mm = compare_tensor(p1.inv.x_tensor, p2.inv.x_tensor, cand.perm, tol.eps_match,
                                        "X", nullptr);
            } else {
                mm = compare_metric(p1.inv.theta_mat, p2.inv.theta_mat, cand.perm, p1.es.n,
                                    tol.eps_match, "Theta", nullptr);
                if (!mm)
                    mm = compare_tensor(p1.inv.y_tensor, p2.inv.y_tensor, cand.perm, tol.eps_match,
                                        "Y", nullptr);
            }
            if (mm) {
                last_mismatch = mm;
                continue;
            }
            std::optional<Witness> w = extract_witness(p1.es, p2.es, cand, tol, opts.seed);
            if (w) {
                // Soundness gate on the true inputs, not the reconstructions.
                const ComplexMatrix k = kron(w->u, w->w);
                const double residual = (s2.rho - k * s1.rho * k.dagger()).frobenius_norm();
                if (residual <= tol.eps_match) {
                    w->residual = residual;
                    v.kind = VerdictKind::Equivalent;
                    v.witness = std::move(w);
                    return v;
                }
                v.notes.push_back("witness verified on coefficients but density residual " +
                                  std::to_string(residual) + " exceeded eps_match; ordering rejected");
                witness_failure = true;
            } else {
                v.notes.push_back(
                    "finding: invariants matched for an ordering but witness extraction failed");
                witness_failure = true;
            }
        }

        const bool has_degenerate_block = !nondeg;
        if (last_mismatch && !has_degenerate_block && !witness_failure) {
            v.kind = VerdictKind::Inequivalent;
            v.mismatch = last_mismatch;
            return v;
        }
        if (last_mismatch && has_degenerate_block) {
            v.kind = VerdictKind::Inconclusive;
            v.reason =
                "all block-respecting orderings mismatched while spectra and J agree; "
                "intra-block eigenbasis freedom is unresolved for degenerate spectra";
            v.mismatch = last_mismatch;
            return v;
        }
        v.kind = VerdictKind::Inconclusive;
        v.reason = witness_failure
                       ? "invariants matched but no witness could be verified"
                       : "no ordering candidate resolved the comparison";
        if (last_mismatch) v.mismatch = last_mismatch;
        return v;
    }

    // At least one side is not CHG. The Proposition criterion cannot certify
    // equivalence here, but for non-degenerate spectra the classification and
    // the invariant tensors are still local-unitary invariants, so a mismatch
    // soundly proves inequivalence.
    if (!nondeg) {
        v.kind = VerdictKind::Inconclusive;
        v.reason = "state is not CHG and its spectrum is degenerate";
        return v;
    }
    if (p1.cls.chg != p2.cls.chg || p1.cls.generic != p2.cls.generic ||
        p1.cls.high_generic != p2.cls.high_generic) {
        v.kind = VerdictKind::Inequivalent;
        v.mismatch = InvariantMismatch{"genericity_class",
                                       {},
                                       cplx(double(p1.cls.chg * 4 + p1.cls.generic * 2 + p1.cls.high_generic), 0.0),
                                       cplx(double(p2.cls.chg * 4 + p2.cls.generic * 2 + p2.cls.high_generic), 0.0)};
        v.notes.push_back("classes: " + to_string(p1.cls.label) + " vs " + to_string(p2.cls.label));
        return v;
    }
    const std::vector<OrderingCandidate> candidates =
        ordering_candidates(p1.es, p2.es, tol, opts.max_orderings);
    if (candidates.empty()) {
        v.kind = VerdictKind::Inequivalent;
        v.mismatch = spectrum_mismatch(p1.es, p2.es, tol);
        return v;
    }
    std::optional<InvariantMismatch> last_mismatch;
    for (const OrderingCandidate& cand : candidates) {
        std::optional<InvariantMismatch> mm = compare_metric(
            p1.inv.omega, p2.inv.omega, cand.perm, p1.es.n, tol.eps_match, "Omega", nullptr);
        if (!mm)
            mm = compare_tensor(p1.inv.x_tensor, p2.inv.x_tensor, cand.perm, tol.eps_match, "X",
                                nullptr);
        if (!mm)
            mm = compare_metric(p1.inv.theta_mat, p2.inv.theta_mat, cand.perm, p1.es.n,
                                tol.eps_match, "Theta", nullptr);
        if (!mm)
            mm = compare_tensor(p1.inv.y_tensor, p2.inv.y_tensor, cand.perm, tol.eps_match, "Y",
                                nullptr);
        if (!mm) {
            v.kind = VerdictKind::Inconclusive;
            v.reason =
                "not CHG: all computed invariants agree, but the criterion cannot certify "
                "equivalence outside the CHG class";
            return v;
        }
        last_mismatch = mm;
    }
    v.kind = VerdictKind::Inequivalent;
    v.mismatch = last_mismatch;
    return v;
}

EquivalenceVerdict decide_tripartite(const TripartiteState& t1, const TripartiteState& t2,
                                     const Tolerance& tol, const DecisionOptions& opts,
                                     const ExternalInvariantFamily& family) {
    if (t1.dim_a != t2.dim_a || t1.dim_b != t2.dim_b || t1.dim_c != t2.dim_c) {
        throw DimensionMismatchError("states live on different systems");
    }

    EquivalenceVerdict v;
    const BipartiteState r1 = partial_trace_a(t1);
    const BipartiteState r2 = partial_trace_a(t2);
    Prepared p1 = prepare(r1, tol, opts.full_rank_mode);
    Prepared p2 = prepare(r2, tol, opts.full_rank_mode);
    v.class_a = p1.cls;
    v.class_b = p2.cls;

    if (p1.es.n != p2.es.n) {
        v.kind = VerdictKind::Inequivalent;
        v.mismatch = InvariantMismatch{"rank", {}, cplx(double(p1.es.n), 0.0), cplx(double(p2.es.n), 0.0)};
        return v;
    }
    for (std::size_t s = 0; s < p1.inv.j_moments.size(); ++s) {
        if (std::abs(p1.inv.j_moments[s] - p2.inv.j_moments[s]) > tol.eps_match) {
            v.kind = VerdictKind::Inequivalent;
            v.mismatch = InvariantMismatch{"J", {s}, p1.inv.j_moments[s], p2.inv.j_moments[s]};
            return v;
        }
    }

    const bool nondeg = spectrum_nondegenerate(p1.es) && spectrum_nondegenerate(p2.es);
    if (!p1.cls.chg || !p2.cls.chg) {
        if (nondeg && p1.cls.chg != p2.cls.chg) {
            v.kind = VerdictKind::Inequivalent;
            v.mismatch = InvariantMismatch{"genericity_class",
                                           {},
                                           cplx(double(p1.cls.chg), 0.0),
                                           cplx(double(p2.cls.chg), 0.0)};
            v.notes.push_back("classes: " + to_string(p1.cls.label) + " vs " +
                              to_string(p2.cls.label));
            return v;
        }
        v.kind = VerdictKind::Inconclusive;
        v.reason = "the trace over H_A is not a CHG state; the criterion does not apply";
        return v;
    }

    const BranchSelection sel = select_branch(p1.cls, p2.cls, tol, opts.branch);
    if (!sel.ok) {
        v.kind = VerdictKind::Inconclusive;
        v.reason = sel.reason;
        return v;
    }
    v.branch = sel.use_omega ? "omega" : "theta";

    const std::vector<OrderingCandidate> candidates =
        ordering_candidates(p1.es, p2.es, tol, opts.max_orderings);
    if (candidates.empty()) {
        v.kind = VerdictKind::Inequivalent;
        v.mismatch = spectrum_mismatch(p1.es, p2.es, tol);
        return v;
    }

    const std::vector<double>& lam = p1.es.lambdas;
    std::function<bool(std::size_t, std::size_t)> keep_pair = nullptr;
    std::function<bool(std::size_t, std::size_t, std::size_t)> keep_triple = nullptr;
    if (opts.tripartite_scope == CompareScope::DegenerateOnly) {
        keep_pair = [&lam, &tol](std::size_t i, std::size_t j) {
            return std::abs(lam[i] - lam[j]) <= tol.eps_eig;
        };
        keep_triple = [&lam, &tol](std::size_t i, std::size_t j, std::size_t k) {
            return std::abs(lam[i] - lam[j]) <= tol.eps_eig &&
                   std::abs(lam[j] - lam[k]) <= tol.eps_eig &&
                   std::abs(lam[i] - lam[k]) <= tol.eps_eig;
        };
    }

    bool passed = false;
    std::optional<InvariantMismatch> last_mismatch;
    for (const OrderingCandidate& cand : candidates) {
        std::optional<InvariantMismatch> mm;
        if (sel.use_omega) {
            mm = compare_metric(p1.inv.omega, p2.inv.omega, cand.perm, p1.es.n, tol.eps_match,
                                "Omega", keep_pair);
            if (!mm)
                mm = compare_tensor(p1.inv.x_tensor, p2.inv.x_tensor, cand.perm, tol.eps_match, "X",
                                    keep_triple);
        } else {
            mm = compare_metric(p1.inv.theta_mat, p2.inv.theta_mat, cand.perm, p1.es.n,
                                tol.eps_match, "Theta", keep_pair);
            if (!mm)
                mm = compare_tensor(p1.inv.y_tensor, p2.inv.y_tensor, cand.perm, tol.eps_match, "Y",
                                    keep_triple);
        }
        if (!mm) {
            passed = true;
            break;
        }
        last_mismatch = mm;
    }

    if (!passed) {
        if (!nondeg) {
            v.kind = VerdictKind::Inconclusive;
            v.reason =
                "all block-respecting orderings mismatched under a degenerate spectrum; "
                "intra-block eigenbasis freedom is unresolved";
            v.mismatch = last_mismatch;
            return v;
        }
        v.kind = VerdictKind::Inequivalent;
        v.mismatch = last_mismatch;
        return v;
    }

    if (family) {
        const std::vector<double> f1 = family(t1);
        const std::vector<double> f2 = family(t2);
        if (f1.size() != f2.size()) {
            throw Error("external invariant family returned inconsistent lengths");
        }
        for (std::size_t i = 0; i < f1.size(); ++i) {
            if (std::abs(f1[i] - f2[i]) > tol.eps_match) {
                v.kind = VerdictKind::Inequivalent;
                v.mismatch = InvariantMismatch{"I_family", {i}, f1[i], f2[i]};
                return v;
            }
        }
        v.kind = VerdictKind::Equivalent;
        v.notes.push_back(
            "equivalence certified by the external invariant family; the tripartite criterion "
            "yields no constructive witness");
        return v;
    }

    v.kind = VerdictKind::Conditional;
    v.reason = "all implemented checks passed; external invariant family not supplied";
    return v;
}

}  // namespace lueq
