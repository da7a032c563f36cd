#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lueq/complex_matrix.hpp"
#include "lueq/invariants.hpp"
#include "lueq/states.hpp"
#include "lueq/tolerance.hpp"

namespace lueq {

/// Eigenstate reordering of the second state aligning its spectrum with the
/// first; indices may move only within blocks of equal eigenvalue.
struct OrderingCandidate {
    std::vector<std::size_t> perm;  // slot i of state 1 pairs with index perm[i] of state 2
};

inline constexpr std::size_t kDefaultOrderingCap = 10080;  // 7! * 2

/// All block-respecting orderings, empty when the spectra are incompatible.
/// Throws TooManyOrderingsError when the block-factorial product exceeds the cap.
std::vector<OrderingCandidate> ordering_candidates(const EigenSystem& a, const EigenSystem& b,
                                                   const Tolerance& tol,
                                                   std::size_t max_orderings = kDefaultOrderingCap);

/// Local-unitary witness: rho2 ~ (u (x) w) rho1 (u (x) w)^dag.
/// The coefficient matrices transform as A'_j = e^{i beta_j} u A_j w^T.
struct Witness {
    ComplexMatrix u;                  // dim_a x dim_a
    ComplexMatrix w;                  // dim_b x dim_b
    double residual = 0.0;            // Frobenius distance on density matrices
    double max_coeff_residual = 0.0;  // worst per-index phase-aligned coefficient residual
};

enum class VerdictKind { Equivalent, Inequivalent, Inconclusive, Conditional };

std::string to_string(VerdictKind kind);

struct InvariantMismatch {
    std::string invariant;             // "rank", "J", "spectrum", "Omega", "X", ...
    std::vector<std::size_t> indices;  // 0-based entry indices
    cplx lhs = 0.0;
    cplx rhs = 0.0;

    std::string describe() const;
};

struct EquivalenceVerdict {
    VerdictKind kind = VerdictKind::Inconclusive;
    std::optional<Witness> witness;
    std::optional<InvariantMismatch> mismatch;
    std::string reason;
    std::vector<std::string> notes;  // findings worth surfacing (never silently absorbed)
    std::optional<GenericityClass> class_a;
    std::optional<GenericityClass> class_b;
    std::string branch;  // "omega", "theta" or empty
};

enum class BranchChoice { Auto, ForceOmega, ForceTheta };

/// Which Omega/X index tuples the tripartite comparison covers: all of them,
/// or only tuples whose eigenvalues coincide (the literal degenerate-pair rule).
enum class CompareScope { AllPairs, DegenerateOnly };

struct DecisionOptions {
    BranchChoice branch = BranchChoice::Auto;
    std::size_t max_orderings = kDefaultOrderingCap;
    std::uint64_t seed = 0x75c3a9d14ab2e6f1ULL;  // drives witness-extraction randomness
    CompareScope tripartite_scope = CompareScope::AllPairs;
    FullRankMode full_rank_mode = FullRankMode::All;
};

/// Local-unitary equivalence decision for two bipartite density matrices.
EquivalenceVerdict decide_bipartite(const BipartiteState& s1, const BipartiteState& s2,
                                    const Tolerance& tol, const DecisionOptions& opts = {});

/// Constructive witness for one ordering; the invariant comparison for this
/// ordering is assumed to have passed. Returns nothing when the singular-value
/// precondition fails or no alignment attempt verifies.
std::optional<Witness> extract_witness(const EigenSystem& es1, const EigenSystem& es2,
                                       const OrderingCandidate& ordering, const Tolerance& tol,
                                       std::uint64_t seed = DecisionOptions{}.seed);

/// Injectable slot for the companion invariant family I^{A,s}_{alpha,beta};
/// evaluated on a tripartite state, compared entrywise.
using ExternalInvariantFamily = std::function<std::vector<double>(const TripartiteState&)>;

/// Tripartite layer: reduces over H_A, requires the reduced state to be CHG,
/// compares spectra and the branch pair over block-respecting orderings, and
/// consults the external family when supplied (Equivalent/Inequivalent) or
/// reports Conditional when absent and every implemented check passes.
EquivalenceVerdict decide_tripartite(const TripartiteState& t1, const TripartiteState& t2,
                                     const Tolerance& tol, const DecisionOptions& opts = {},
                                     const ExternalInvariantFamily& family = {});

/// Common eigenbasis of a pairwise-commuting Hermitian family, found by
/// diagonalizing a random linear combination and refining residual degenerate
/// subspaces with a second combination.
struct SimDiagResult {
    ComplexMatrix basis;                      // unitary, columns = joint eigenvectors
    std::vector<std::vector<double>> table;   // table[j][k]: eigenvalue of member j on column k
    double off_residual = 0.0;                // worst off-diagonal Frobenius mass
};

SimDiagResult simultaneous_diagonalize(const std::vector<ComplexMatrix>& family,
                                       const Tolerance& tol, std::uint64_t seed);

}  // namespace lueq
