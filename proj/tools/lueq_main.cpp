// lueq: local-unitary invariants, classification and equivalence decisions
// for small bipartite / tripartite quantum states.
//
// Exit codes:
//   0 success / Equivalent        4 Inconclusive
//   1 Inequivalent                5 Conditional (tripartite, no external family)
//   2 malformed file or params    6 ordering cap exceeded
//   3 state validation failure    7 generation failed

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lueq/equivalence.hpp"
#include "lueq/errors.hpp"
#include "lueq/io.hpp"
#include "lueq/testkit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInequivalent = 1;
constexpr int kExitMalformed = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitConditional = 5;
constexpr int kExitTooManyOrderings = 6;
constexpr int kExitGenerationFailed = 7;

struct TolFlags {
    std::optional<double> zero;
    std::optional<double> eig;
    std::optional<double> match;

    lueq::Tolerance resolve() const {
        lueq::Tolerance tol;
        if (const char* env = std::getenv("LUEQ_TOL_ZERO")) {
            char* end = nullptr;
            const double v = std::strtod(env, &end);
            if (end != env && v > 0.0) tol.eps_zero = v;
        }
        if (zero) tol.eps_zero = *zero;
        if (eig) tol.eps_eig = *eig;
        if (match) tol.eps_match = *match;
        tol.check();
        return tol;
    }
};

void add_tol_flags(CLI::App* cmd, TolFlags& flags) {
    cmd->add_option("--tol-zero", flags.zero, "absolute numerical-zero threshold (default 1e-9)");
    cmd->add_option("--tol-eig", flags.eig, "eigenvalue degeneracy gap (default 1e-7)");
    cmd->add_option("--tol-match", flags.match, "invariant comparison tolerance (default 1e-8)");
}

int verdict_exit_code(lueq::VerdictKind kind) {
    switch (kind) {
        case lueq::VerdictKind::Equivalent: return kExitOk;
        case lueq::VerdictKind::Inequivalent: return kExitInequivalent;
        case lueq::VerdictKind::Inconclusive: return kExitInconclusive;
        case lueq::VerdictKind::Conditional: return kExitConditional;
    }
    return kExitInconclusive;
}

std::string stem_of(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
        return path.substr(0, path.size() - 5);
    return path;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local-unitary invariants and equivalence of small quantum states"};
    app.require_subcommand(1);

    // ---- invariants ----
    std::string inv_file;
    TolFlags inv_tol;
    bool inv_json = false, inv_text = false, inv_full = false;
    auto* inv_cmd = app.add_subcommand("invariants", "compute the invariant set of one state");
    inv_cmd->add_option("file", inv_file, "state file (JSON)")->required();
    inv_cmd->add_flag("--json", inv_json, "JSON report");
    inv_cmd->add_flag("--text", inv_text, "text report (default)");
    inv_cmd->add_flag("--full", inv_full, "do not truncate matrices above 6x6");
    add_tol_flags(inv_cmd, inv_tol);

    // ---- classify ----
    std::string cls_file;
    TolFlags cls_tol;
    bool cls_json = false;
    bool cls_any_rank = false;
    auto* cls_cmd = app.add_subcommand("classify", "genericity / CHG classification of one state");
    cls_cmd->add_option("file", cls_file, "state file (JSON)")->required();
    cls_cmd->add_flag("--json", cls_json, "JSON report");
    cls_cmd->add_flag("--full-rank-any", cls_any_rank,
                      "CHG full-rank test passes if any rho_i has full rank (default: all)");
    add_tol_flags(cls_cmd, cls_tol);

    // ---- equiv ----
    std::string eq_file1, eq_file2, eq_branch;
    TolFlags eq_tol;
    bool eq_json = false, eq_text = false, eq_full = false, eq_restrict = false;
    std::size_t eq_max_orderings = lueq::kDefaultOrderingCap;
    std::uint64_t eq_seed = lueq::DecisionOptions{}.seed;
    auto* eq_cmd = app.add_subcommand("equiv", "decide local-unitary equivalence of two states");
    eq_cmd->add_option("file1", eq_file1, "first state file")->required();
    eq_cmd->add_option("file2", eq_file2, "second state file")->required();
    eq_cmd->add_option("--force-branch", eq_branch, "omega|theta: pin the invariant branch")
        ->check(CLI::IsMember({"omega", "theta"}));
    eq_cmd->add_option("--max-orderings", eq_max_orderings,
                       "cap on eigenstate ordering candidates (default 10080)");
    eq_cmd->add_option("--seed", eq_seed, "seed for witness-extraction randomness");
    eq_cmd->add_flag("--restrict-degenerate", eq_restrict,
                     "tripartite: compare Omega/X only on equal-eigenvalue index tuples");
    eq_cmd->add_flag("--json", eq_json, "JSON report");
    eq_cmd->add_flag("--text", eq_text, "text report (default)");
    eq_cmd->add_flag("--full", eq_full, "do not truncate witness matrices");
    add_tol_flags(eq_cmd, eq_tol);

    // ---- gen ----
    std::string gen_dims, gen_kind = "chg", gen_out;
    TolFlags gen_tol;
    std::size_t gen_rank = 0;
    std::uint64_t gen_seed = 0;
    double gen_magnitude = 0.3;
    bool gen_degenerate = false;
    auto* gen_cmd = app.add_subcommand("gen", "generate deterministic test states");
    gen_cmd->add_option("--dims", gen_dims, "subsystem dimensions, e.g. 2,2 or 2,2,2")->required();
    gen_cmd->add_option("--rank", gen_rank, "state rank (default: first dimension)");
    gen_cmd->add_option("--seed", gen_seed, "generator seed (default 0)");
    gen_cmd->add_option("--kind", gen_kind, "chg | haar-pair | perturbed")
        ->check(CLI::IsMember({"chg", "haar-pair", "perturbed"}));
    gen_cmd->add_option("--magnitude", gen_magnitude, "perturbation strength (default 0.3)");
    gen_cmd->add_flag("--degenerate", gen_degenerate, "collide two eigenvalues");
    gen_cmd->add_option("--out", gen_out, "output path (pair kinds derive .a/.b/.uw names)")
        ->required();
    add_tol_flags(gen_cmd, gen_tol);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inv_cmd) {
            const lueq::Tolerance tol = inv_tol.resolve();
            const lueq::io::LoadedState state = lueq::io::load_state(inv_file, tol);
            const lueq::io::StateAnalysis a = lueq::io::analyze(state, tol);
            if (inv_json && !inv_text)
                std::cout << lueq::io::invariants_report(a, tol).dump(2) << "\n";
            else
                std::cout << lueq::io::invariants_text(a, tol, inv_full);
            return kExitOk;
        }

        if (*cls_cmd) {
            const lueq::Tolerance tol = cls_tol.resolve();
            const lueq::io::LoadedState state = lueq::io::load_state(cls_file, tol);
            const lueq::io::StateAnalysis a = lueq::io::analyze(
                state, tol, cls_any_rank ? lueq::FullRankMode::Any : lueq::FullRankMode::All);
            if (cls_json)
                std::cout << lueq::io::classify_report(a, tol).dump(2) << "\n";
            else
                std::cout << lueq::io::classify_text(a);
            return kExitOk;
        }

        if (*eq_cmd) {
            const lueq::Tolerance tol = eq_tol.resolve();
            const lueq::io::LoadedState s1 = lueq::io::load_state(eq_file1, tol);
            const lueq::io::LoadedState s2 = lueq::io::load_state(eq_file2, tol);
            if (s1.kind != s2.kind) {
                std::cerr << "error: the two files hold different state kinds\n";
                return kExitMalformed;
            }
            lueq::DecisionOptions opts;
            opts.max_orderings = eq_max_orderings;
            opts.seed = eq_seed;
            if (eq_branch == "omega") opts.branch = lueq::BranchChoice::ForceOmega;
            if (eq_branch == "theta") opts.branch = lueq::BranchChoice::ForceTheta;
            if (eq_restrict) opts.tripartite_scope = lueq::CompareScope::DegenerateOnly;

            lueq::EquivalenceVerdict verdict;
            if (s1.kind == lueq::io::LoadedState::Kind::BipartiteDensity) {
                if (s1.bip.dim_a != s2.bip.dim_a || s1.bip.dim_b != s2.bip.dim_b) {
                    std::cerr << "error: dimension mismatch between the two states\n";
                    return kExitMalformed;
                }
                verdict = lueq::decide_bipartite(s1.bip, s2.bip, tol, opts);
            } else {
                if (s1.tri.dim_a != s2.tri.dim_a || s1.tri.dim_b != s2.tri.dim_b ||
                    s1.tri.dim_c != s2.tri.dim_c) {
                    std::cerr << "error: dimension mismatch between the two states\n";
                    return kExitMalformed;
                }
                verdict = lueq::decide_tripartite(s1.tri, s2.tri, tol, opts);
            }
            if (eq_json && !eq_text)
                std::cout << lueq::io::equivalence_report(verdict, s1.label, s2.label, tol).dump(2)
                          << "\n";
            else
                std::cout << lueq::io::equivalence_text(verdict, eq_full);
            return verdict_exit_code(verdict.kind);
        }

        if (*gen_cmd) {
            const lueq::Tolerance tol = gen_tol.resolve();
            std::vector<std::size_t> dims;
            {
                std::string part;
                for (const char ch : gen_dims + ",") {
                    if (ch == ',') {
                        if (part.empty()) throw lueq::ParseError("bad --dims");
                        dims.push_back(static_cast<std::size_t>(std::stoul(part)));
                        part.clear();
                    } else if (ch >= '0' && ch <= '9') {
                        part.push_back(ch);
                    } else {
                        throw lueq::ParseError("bad --dims");
                    }
                }
            }
            if (dims.size() != 2 && dims.size() != 3) throw lueq::ParseError("--dims needs 2 or 3 entries");
            for (const auto d : dims)
                if (d == 0) throw lueq::ParseError("--dims entries must be positive");

            lueq::testkit::ChgOptions chg_opts;
            chg_opts.degenerate_spectrum = gen_degenerate;

            if (dims.size() == 3) {
                if (gen_kind != "chg") throw lueq::ParseError("tripartite gen supports --kind chg only");
                const std::size_t rank = gen_rank == 0 ? std::min(dims[0], dims[1]) : gen_rank;
                if (rank > dims[0]) throw lueq::ParseError("tripartite rank must not exceed the first dimension");
                if (dims[1] > dims[2]) throw lueq::ParseError("tripartite gen needs dim_b <= dim_c");
                const lueq::TripartiteState psi = lueq::testkit::random_chg_tripartite(
                    dims[0], dims[1], dims[2], rank, gen_seed, tol, chg_opts);
                lueq::io::save_tripartite(gen_out, psi, "gen seed " + std::to_string(gen_seed));
                std::cout << "wrote " << gen_out << "\n";
                return kExitOk;
            }

            const std::size_t na = dims[0], nb = dims[1];
            const std::size_t n_sq = std::min(na, nb) * std::min(na, nb);
            const std::size_t rank = gen_rank == 0 ? na : gen_rank;
            if (na > nb) throw lueq::ParseError("gen needs dim_a <= dim_b");
            if (rank == 0 || rank > n_sq)
                throw lueq::ParseError("rank must lie in 1..min(dims)^2 = " + std::to_string(n_sq));

            const std::string label = "gen seed " + std::to_string(gen_seed);
            const lueq::BipartiteState rho =
                lueq::testkit::random_chg_state(na, nb, rank, gen_seed, tol, chg_opts);
            if (gen_kind == "chg") {
                lueq::io::save_bipartite(gen_out, rho, label);
                std::cout << "wrote " << gen_out << "\n";
            } else if (gen_kind == "haar-pair") {
                const lueq::ComplexMatrix u = lueq::testkit::haar_unitary(na, gen_seed ^ 0x9e3779b9ULL);
                const lueq::ComplexMatrix w = lueq::testkit::haar_unitary(nb, gen_seed ^ 0x7f4a7c15ULL);
                const lueq::BipartiteState rho2 = lueq::testkit::conjugate_bipartite(rho, u, w);
                const std::string stem = stem_of(gen_out);
                lueq::io::save_bipartite(stem + ".a.json", rho, label + " (a)");
                lueq::io::save_bipartite(stem + ".b.json", rho2, label + " (b = (u x w) a)");
                lueq::io::save_unitary_pair(stem + ".uw.json", u, w, label);
                std::cout << "wrote " << stem << ".a.json, " << stem << ".b.json, " << stem
                          << ".uw.json\n";
            } else {  // perturbed
                const lueq::BipartiteState rho2 =
                    lueq::testkit::perturb_nonlocal(rho, gen_magnitude, gen_seed ^ 0x243f6a88ULL);
                const std::string stem = stem_of(gen_out);
                lueq::io::save_bipartite(stem + ".a.json", rho, label + " (a)");
                lueq::io::save_bipartite(stem + ".b.json", rho2, label + " (b = perturbed a)");
                std::cout << "wrote " << stem << ".a.json, " << stem << ".b.json\n";
            }
            return kExitOk;
        }
    } catch (const lueq::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const lueq::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const lueq::TooManyOrderingsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTooManyOrderings;
    } catch (const lueq::GenerationFailedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGenerationFailed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const lueq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
