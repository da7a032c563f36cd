#include "lueq/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lueq/errors.hpp"

namespace lueq::io {

namespace {

constexpr int kSchemaVersion = 1;

std::vector<cplx> parse_complex_array(const json& data, std::size_t expected,
                                      const std::string& what) {
    if (!data.is_array() || data.size() != expected) {
        throw ParseError(what + ": expected an array of " + std::to_string(expected) +
                         " [re, im] pairs");
    }
    std::vector<cplx> out;
    out.reserve(expected);
    for (const auto& pair : data) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ParseError(what + ": every entry must be a [re, im] number pair");
        }
        const double re = pair[0].get<double>();
        const double im = pair[1].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im)) {
            throw ParseError(what + ": entries must be finite");
        }
        out.emplace_back(re, im);
    }
    return out;
}

json complex_array_to_json(const std::vector<cplx>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(json::array({x.real(), x.imag()}));
    return out;
}

std::string format_double(double x) {
    // %.12g keeps short decimals short (0.5 stays "0.5") and is plenty for
    // eyeballing; JSON output carries the full-precision values.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string format_complex(cplx z) {
    if (std::abs(z.imag()) <= 1e-12) return format_double(z.real());
    std::ostringstream os;
    os << format_double(z.real()) << (z.imag() < 0 ? " - " : " + ")
       << format_double(std::abs(z.imag())) << "i";
    return os.str();
}

json tolerance_to_json(const Tolerance& tol) {
    json t;
    t["eps_zero"] = tol.eps_zero;
    t["eps_eig"] = tol.eps_eig;
    t["eps_match"] = tol.eps_match;
    return t;
}

json real_matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).real());
        rows.push_back(std::move(row));
    }
    return rows;
}

json tensor_to_json(const Tensor3& t) {
    json out = json::object();
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t j = 0; j < t.n; ++j)
            for (std::size_t k = 0; k < t.n; ++k) {
                const std::string key = std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                                        std::to_string(k + 1);
                const cplx v = t.at(i, j, k);
                out[key] = json::array({v.real(), v.imag()});
            }
    return out;
}

json class_to_json(const GenericityClass& c) {
    json out;
    out["label"] = to_string(c.label);
    out["generic"] = c.generic;
    out["high_generic"] = c.high_generic;
    out["chg"] = c.chg;
    out["det_omega_n"] = c.det_omega_n;
    out["det_theta_n"] = c.det_theta_n;
    out["max_commutator_norm"] = c.max_commutator_norm;
    out["min_rho_rank"] = c.min_rho_rank;
    return out;
}

void append_metric_text(std::ostringstream& os, const char* name, const ComplexMatrix& m,
                        bool full) {
    const std::size_t limit = full ? m.rows() : std::min<std::size_t>(m.rows(), 6);
    for (std::size_t i = 0; i < limit; ++i)
        for (std::size_t j = 0; j < limit; ++j)
            os << name << "[" << i + 1 << "][" << j + 1 << "] = " << format_double(m(i, j).real())
               << "\n";
    if (limit < m.rows())
        os << name << ": truncated to " << limit << "x" << limit << " of " << m.rows() << "x"
           << m.rows() << " (use --full)\n";
}

void append_tensor_text(std::ostringstream& os, const char* name, const Tensor3& t, bool full) {
    const std::size_t limit = full ? t.n : std::min<std::size_t>(t.n, 6);
    for (std::size_t i = 0; i < limit; ++i)
        for (std::size_t j = 0; j < limit; ++j)
            for (std::size_t k = 0; k < limit; ++k)
                os << name << "[" << i + 1 << "][" << j + 1 << "][" << k + 1
                   << "] = " << format_complex(t.at(i, j, k)) << "\n";
    if (limit < t.n) os << name << ": truncated (use --full)\n";
}

}  // namespace

LoadedState parse_state(const std::string& text, const Tolerance& tol) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("state file must be a JSON object");
    if (!doc.contains("kind") || !doc["kind"].is_string())
        throw ParseError("missing string field \"kind\"");
    if (!doc.contains("dims") || !doc["dims"].is_array())
        throw ParseError("missing array field \"dims\"");
    if (!doc.contains("data")) throw ParseError("missing field \"data\"");

    std::vector<std::size_t> dims;
    for (const auto& d : doc["dims"]) {
        if (!d.is_number_unsigned() || d.get<std::size_t>() == 0)
            throw ParseError("\"dims\" must contain positive integers");
        dims.push_back(d.get<std::size_t>());
    }

    LoadedState out;
    if (doc.contains("label")) {
        if (!doc["label"].is_string()) throw ParseError("\"label\" must be a string");
        out.label = doc["label"].get<std::string>();
    }

    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "bipartite_density") {
        if (dims.size() != 2) throw ParseError("bipartite_density needs exactly 2 dims");
        const std::size_t dim = dims[0] * dims[1];
        const std::vector<cplx> entries =
            parse_complex_array(doc["data"], dim * dim, "\"data\"");
        out.kind = LoadedState::Kind::BipartiteDensity;
        out.bip = validate_bipartite(ComplexMatrix(dim, dim, entries), dims[0], dims[1], tol);
    } else if (kind == "tripartite_pure") {
        if (dims.size() != 3) throw ParseError("tripartite_pure needs exactly 3 dims");
        const std::size_t dim = dims[0] * dims[1] * dims[2];
        const std::vector<cplx> psi = parse_complex_array(doc["data"], dim, "\"data\"");
        out.kind = LoadedState::Kind::TripartitePure;
        out.tri = validate_tripartite(psi, dims[0], dims[1], dims[2], tol);
    } else {
        throw ParseError("unknown kind \"" + kind + "\"");
    }
    return out;
}

LoadedState load_state(const std::string& path, const Tolerance& tol) {
    return parse_state(read_text_file(path), tol);
}

void save_bipartite(const std::string& path, const BipartiteState& state,
                    const std::string& label) {
    json doc;
    doc["kind"] = "bipartite_density";
    doc["dims"] = json::array({state.dim_a, state.dim_b});
    if (!label.empty()) doc["label"] = label;
    doc["data"] = complex_array_to_json(state.rho.entries());
    write_text_file(path, doc.dump(2) + "\n");
}

void save_tripartite(const std::string& path, const TripartiteState& state,
                     const std::string& label) {
    json doc;
    doc["kind"] = "tripartite_pure";
    doc["dims"] = json::array({state.dim_a, state.dim_b, state.dim_c});
    if (!label.empty()) doc["label"] = label;
    doc["data"] = complex_array_to_json(state.psi);
    write_text_file(path, doc.dump(2) + "\n");
}

void save_unitary_pair(const std::string& path, const ComplexMatrix& u, const ComplexMatrix& w,
                       const std::string& label) {
    json doc;
    doc["kind"] = "local_unitary_pair";
    doc["dims"] = json::array({u.rows(), w.rows()});
    if (!label.empty()) doc["label"] = label;
    doc["u"] = complex_matrix_to_json(u);
    doc["w"] = complex_matrix_to_json(w);
    write_text_file(path, doc.dump(2) + "\n");
}

std::pair<ComplexMatrix, ComplexMatrix> load_unitary_pair(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("kind", "") != "local_unitary_pair" ||
        !doc.contains("u") || !doc.contains("w")) {
        throw ParseError("not a local_unitary_pair file");
    }
    return {complex_matrix_from_json(doc["u"]), complex_matrix_from_json(doc["w"])};
}

json complex_matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix complex_matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix: expected a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ParseError("matrix: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& pair = j[i][c];
            if (!pair.is_array() || pair.size() != 2) throw ParseError("matrix: bad entry");
            m(i, c) = cplx(pair[0].get<double>(), pair[1].get<double>());
        }
    }
    return m;
}

StateAnalysis analyze(const LoadedState& state, const Tolerance& tol, FullRankMode mode) {
    StateAnalysis a;
    a.label = state.label;
    BipartiteState bip;
    if (state.kind == LoadedState::Kind::BipartiteDensity) {
        a.kind = "bipartite_density";
        a.dims = {state.bip.dim_a, state.bip.dim_b};
        bip = state.bip;
    } else {
        a.kind = "tripartite_pure";
        a.dims = {state.tri.dim_a, state.tri.dim_b, state.tri.dim_c};
        a.reduced_over_a = true;
        bip = partial_trace_a(state.tri);
    }
    a.es = eigensystem(bip, tol);
    const ReducedFamily rf = reduced_family(a.es);
    a.inv = compute_invariants(a.es, rf);
    a.cls = classify(a.es, rf, a.inv, tol, mode);
    return a;
}

json invariants_report(const StateAnalysis& a, const Tolerance& tol) {
    json doc;
    doc["schema"] = kSchemaVersion;
    doc["command"] = "invariants";
    if (!a.label.empty()) doc["label"] = a.label;
    doc["kind"] = a.kind;
    doc["dims"] = a.dims;
    if (a.reduced_over_a) doc["reduced_over"] = "A";
    doc["tolerance"] = tolerance_to_json(Tolerance(tol));
    doc["rank"] = a.es.n;
    doc["lambdas"] = a.es.lambdas;
    doc["classification"] = class_to_json(a.cls);
    doc["j_moments"] = a.inv.j_moments;
    doc["omega"] = real_matrix_to_json(a.inv.omega);
    doc["theta"] = real_matrix_to_json(a.inv.theta_mat);
    doc["x"] = tensor_to_json(a.inv.x_tensor);
    doc["y"] = tensor_to_json(a.inv.y_tensor);
    return doc;
}

std::string invariants_text(const StateAnalysis& a, const Tolerance& tol, bool full) {
    std::ostringstream os;
    if (!a.label.empty()) os << "label: " << a.label << "\n";
    os << "kind: " << a.kind << "\n";
    os << "dims:";
    for (const auto d : a.dims) os << " " << d;
    os << "\n";
    if (a.reduced_over_a) os << "analyzed: trace over A\n";
    os << "rank: " << a.es.n << "\n";
    for (std::size_t i = 0; i < a.es.lambdas.size(); ++i)
        os << "lambda[" << i + 1 << "] = " << format_double(a.es.lambdas[i]) << "\n";
    os << "class: " << to_string(a.cls.label) << "\n";
    os << "det_omega_n: " << format_double(a.cls.det_omega_n) << "\n";
    os << "det_theta_n: " << format_double(a.cls.det_theta_n) << "\n";
    os << "max_commutator_norm: " << format_double(a.cls.max_commutator_norm) << "\n";
    os << "min_rho_rank: " << a.cls.min_rho_rank << "\n";
    for (std::size_t s = 0; s < a.inv.j_moments.size(); ++s)
        os << "J[" << s + 1 << "] = " << format_double(a.inv.j_moments[s]) << "\n";
    append_metric_text(os, "Omega", a.inv.omega, full);
    append_metric_text(os, "Theta", a.inv.theta_mat, full);
    append_tensor_text(os, "X", a.inv.x_tensor, full);
    append_tensor_text(os, "Y", a.inv.y_tensor, full);
    (void)tol;
    return os.str();
}

json classify_report(const StateAnalysis& a, const Tolerance& tol) {
    json doc;
    doc["schema"] = kSchemaVersion;
    doc["command"] = "classify";
    if (!a.label.empty()) doc["label"] = a.label;
    doc["kind"] = a.kind;
    doc["dims"] = a.dims;
    if (a.reduced_over_a) doc["reduced_over"] = "A";
    doc["tolerance"] = tolerance_to_json(tol);
    doc["rank"] = a.es.n;
    doc["classification"] = class_to_json(a.cls);
    return doc;
}

std::string classify_text(const StateAnalysis& a) {
    std::ostringstream os;
    if (!a.label.empty()) os << "label: " << a.label << "\n";
    os << "class: " << to_string(a.cls.label) << "\n";
    os << "generic: " << (a.cls.generic ? "yes" : "no") << "\n";
    os << "high_generic: " << (a.cls.high_generic ? "yes" : "no") << "\n";
    os << "chg: " << (a.cls.chg ? "yes" : "no") << "\n";
    os << "det_omega_n: " << format_double(a.cls.det_omega_n) << "\n";
    os << "det_theta_n: " << format_double(a.cls.det_theta_n) << "\n";
    os << "max_commutator_norm: " << format_double(a.cls.max_commutator_norm) << "\n";
    os << "min_rho_rank: " << a.cls.min_rho_rank << "\n";
    return os.str();
}

json equivalence_report(const EquivalenceVerdict& verdict, const std::string& label1,
                        const std::string& label2, const Tolerance& tol) {
    json doc;
    doc["schema"] = kSchemaVersion;
    doc["command"] = "equiv";
    if (!label1.empty() || !label2.empty()) {
        doc["labels"] = json::array({label1, label2});
    }
    doc["tolerance"] = tolerance_to_json(tol);
    doc["verdict"] = to_string(verdict.kind);
    if (!verdict.branch.empty()) doc["branch"] = verdict.branch;
    if (!verdict.reason.empty()) doc["reason"] = verdict.reason;
    if (verdict.mismatch) {
        json mm;
        mm["invariant"] = verdict.mismatch->invariant;
        json idx = json::array();
        for (const auto i : verdict.mismatch->indices) idx.push_back(i + 1);
        mm["indices"] = idx;
        mm["lhs"] = json::array({verdict.mismatch->lhs.real(), verdict.mismatch->lhs.imag()});
        mm["rhs"] = json::array({verdict.mismatch->rhs.real(), verdict.mismatch->rhs.imag()});
        doc["mismatch"] = mm;
    }
    if (verdict.witness) {
        json w;
        w["u"] = complex_matrix_to_json(verdict.witness->u);
        w["w"] = complex_matrix_to_json(verdict.witness->w);
        w["residual"] = verdict.witness->residual;
        w["max_coeff_residual"] = verdict.witness->max_coeff_residual;
        doc["witness"] = w;
    }
    if (verdict.class_a) doc["class_a"] = class_to_json(*verdict.class_a);
    if (verdict.class_b) doc["class_b"] = class_to_json(*verdict.class_b);
    if (!verdict.notes.empty()) doc["notes"] = verdict.notes;
    return doc;
}

std::string equivalence_text(const EquivalenceVerdict& verdict, bool full) {
    std::ostringstream os;
    os << "verdict: " << to_string(verdict.kind) << "\n";
    if (!verdict.branch.empty()) os << "branch: " << verdict.branch << "\n";
    if (!verdict.reason.empty()) os << "reason: " << verdict.reason << "\n";
    if (verdict.mismatch) os << "first mismatch: " << verdict.mismatch->describe() << "\n";
    if (verdict.class_a) os << "class_a: " << to_string(verdict.class_a->label) << "\n";
    if (verdict.class_b) os << "class_b: " << to_string(verdict.class_b->label) << "\n";
    if (verdict.witness) {
        os << "witness residual: " << format_double(verdict.witness->residual) << "\n";
        os << "witness max coefficient residual: "
           << format_double(verdict.witness->max_coeff_residual) << "\n";
        const auto print_matrix = [&os, full](const char* name, const ComplexMatrix& m) {
            const std::size_t limit = full ? m.rows() : std::min<std::size_t>(m.rows(), 6);
            for (std::size_t i = 0; i < limit; ++i) {
                os << name << "[" << i + 1 << "] =";
                for (std::size_t j = 0; j < limit; ++j) os << " (" << format_complex(m(i, j)) << ")";
                os << "\n";
            }
            if (limit < m.rows()) os << name << ": truncated (use --full)\n";
        };
        print_matrix("u", verdict.witness->u);
        print_matrix("w", verdict.witness->w);
    }
    for (const auto& note : verdict.notes) os << "note: " << note << "\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace lueq::io
