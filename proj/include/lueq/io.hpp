#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lueq/equivalence.hpp"
#include "lueq/invariants.hpp"
#include "lueq/states.hpp"
#include "lueq/tolerance.hpp"

namespace lueq::io {

using json = nlohmann::ordered_json;

/// A parsed state file: either a bipartite density matrix or a tripartite
/// pure vector. Parsing errors throw ParseError; physical-property failures
/// throw ValidationError.
struct LoadedState {
    enum class Kind { BipartiteDensity, TripartitePure };
    Kind kind = Kind::BipartiteDensity;
    std::string label;
    BipartiteState bip;   // set when kind == BipartiteDensity
    TripartiteState tri;  // set when kind == TripartitePure
};

LoadedState load_state(const std::string& path, const Tolerance& tol);
LoadedState parse_state(const std::string& text, const Tolerance& tol);

void save_bipartite(const std::string& path, const BipartiteState& state,
                    const std::string& label);
void save_tripartite(const std::string& path, const TripartiteState& state,
                     const std::string& label);
/// Companion file for generated pairs: the u, w actually applied.
void save_unitary_pair(const std::string& path, const ComplexMatrix& u, const ComplexMatrix& w,
                       const std::string& label);
/// Reads back a unitary-pair file written by save_unitary_pair.
std::pair<ComplexMatrix, ComplexMatrix> load_unitary_pair(const std::string& path);

json complex_matrix_to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const json& j);

/// Everything cmd_invariants / cmd_classify report about one state.
struct StateAnalysis {
    std::string label;
    std::string kind;
    std::vector<std::size_t> dims;
    bool reduced_over_a = false;  // tripartite input analyzed via its trace over H_A
    EigenSystem es;
    InvariantSet inv;
    GenericityClass cls;
};

StateAnalysis analyze(const LoadedState& state, const Tolerance& tol,
                      FullRankMode mode = FullRankMode::All);

json invariants_report(const StateAnalysis& a, const Tolerance& tol);
std::string invariants_text(const StateAnalysis& a, const Tolerance& tol, bool full);

json classify_report(const StateAnalysis& a, const Tolerance& tol);
std::string classify_text(const StateAnalysis& a);

json equivalence_report(const EquivalenceVerdict& verdict, const std::string& label1,
                        const std::string& label2, const Tolerance& tol);
std::string equivalence_text(const EquivalenceVerdict& verdict, bool full);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace lueq::io
