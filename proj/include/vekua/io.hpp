#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "vekua/base.hpp"
#include "vekua/constvekua.hpp"
#include "vekua/field.hpp"
#include "vekua/group.hpp"
#include "vekua/odevekua.hpp"
#include "vekua/symbol.hpp"

namespace vekua {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- basics

inline json complex_to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline cplx complex_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("re") || !j.contains("im"))
        throw ConfigError(where + " must be a complex object {re, im}");
    if (!j["re"].is_number() || !j["im"].is_number())
        throw ConfigError(where + " components must be numbers");
    return cplx{j["re"].get<double>(), j["im"].get<double>()};
}

inline json group_to_json(const GroupSpec& g) {
    json tags = json::array();
    for (Factor f : g.factors) tags.push_back(f == Factor::circle ? "t1" : "s3");
    return tags;
}

inline GroupSpec group_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ConfigError("config field \"group\" must be a nonempty array of factor tags");
    std::vector<Factor> factors;
    for (const json& tag : j) {
        const std::string t = tag.is_string() ? tag.get<std::string>() : std::string();
        if (t == "t1")
            factors.push_back(Factor::circle);
        else if (t == "s3")
            factors.push_back(Factor::sphere3);
        else
            throw ConfigError("unknown group factor tag; expected \"t1\" or \"s3\"");
    }
    return make_group(factors);
}

inline json rep_to_json(const RepPoint& r) { return json(r.idx); }

inline RepPoint rep_from_json(const GroupSpec& g, const json& j) {
    if (!j.is_array())
        throw ConfigError("rep must be an array of integers");
    std::vector<int> idx;
    for (const json& v : j) {
        if (!v.is_number_integer()) throw ConfigError("rep indices must be integers");
        idx.push_back(v.get<int>());
    }
    return make_rep(g, idx);
}

inline json entry_to_json(const EntryIndex& e) { return json(e.twice_m); }

inline EntryIndex entry_from_json(const GroupSpec& g, const RepPoint& r, const json& j) {
    if (!j.is_array()) throw ConfigError("entry must be an array of doubled integers");
    EntryIndex e;
    for (const json& v : j) {
        if (!v.is_number_integer()) throw ConfigError("entry indices must be integers");
        e.twice_m.push_back(v.get<int>());
    }
    check_entry(g, r, e);
    return e;
}

namespace detail {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << text;
}

inline json parse_json_file(const std::string& path) {
    try {
        return json::parse(slurp(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
}

} // namespace detail

// ------------------------------------------------------ coefficient files

inline json field_to_json(const CoefficientField& u) {
    json records = json::array();
    for (std::size_t i = 0; i < u.reps.size(); ++i) {
        const RepPoint& r = u.reps[i];
        json matrix = json::array();
        for (int row = 0; row < r.dim; ++row) {
            json line = json::array();
            for (int col = 0; col < r.dim; ++col)
                line.push_back(complex_to_json(
                    u.mats[i][static_cast<std::size_t>(row * r.dim + col)]));
            matrix.push_back(std::move(line));
        }
        records.push_back(json{{"rep", rep_to_json(r)}, {"matrix", std::move(matrix)}});
    }
    return records;
}

inline CoefficientField field_from_json(const GroupSpec& g, const json& j) {
    if (!j.is_array()) throw ConfigError("coefficient file must be a JSON array of records");
    CoefficientField u = zero_field(g);
    for (const json& rec : j) {
        if (!rec.contains("rep") || !rec.contains("matrix"))
            throw ConfigError("coefficient record needs \"rep\" and \"matrix\"");
        const RepPoint r = rep_from_json(g, rec["rep"]);
        const json& m = rec["matrix"];
        if (!m.is_array() || m.size() != static_cast<std::size_t>(r.dim))
            throw ConfigError("matrix rows do not match the rep dimension");
        u.ensure(r);
        for (int row = 0; row < r.dim; ++row) {
            const json& line = m[static_cast<std::size_t>(row)];
            if (!line.is_array() || line.size() != static_cast<std::size_t>(r.dim))
                throw ConfigError("matrix columns do not match the rep dimension");
            for (int col = 0; col < r.dim; ++col)
                u.set(r, row, col,
                      complex_from_json(line[static_cast<std::size_t>(col)],
                                        "matrix entry"));
        }
    }
    return u;
}

inline void save_field(const CoefficientField& u, const std::string& path) {
    detail::spill(path, field_to_json(u).dump(1) + "\n");
}

inline CoefficientField load_field(const GroupSpec& g, const std::string& path) {
    return field_from_json(g, detail::parse_json_file(path));
}

inline json time_field_to_json(const TimeCoefficientField& u) {
    json records = json::array();
    for (const TimeRecord& rec : u.records) {
        json entries = json::array();
        for (const TimeEntry& te : rec.entries) {
            json samples = json::array();
            for (cplx z : te.samples) samples.push_back(complex_to_json(z));
            entries.push_back(json{{"row", entry_to_json(te.row)},
                                   {"col", entry_to_json(te.col)},
                                   {"grid", u.grid},
                                   {"samples", std::move(samples)}});
        }
        records.push_back(
            json{{"rep", rep_to_json(rec.rep)}, {"entries", std::move(entries)}});
    }
    return records;
}

inline TimeCoefficientField time_field_from_json(const GroupSpec& g, const json& j) {
    if (!j.is_array())
        throw ConfigError("time coefficient file must be a JSON array of records");
    int grid = -1;
    TimeCoefficientField u;
    for (const json& rec : j) {
        if (!rec.contains("rep") || !rec.contains("entries"))
            throw ConfigError("time record needs \"rep\" and \"entries\"");
        const RepPoint r = rep_from_json(g, rec["rep"]);
        for (const json& ent : rec["entries"]) {
            if (!ent.contains("row") || !ent.contains("col") || !ent.contains("grid") ||
                !ent.contains("samples"))
                throw ConfigError("time entry needs \"row\", \"col\", \"grid\", \"samples\"");
            const int T = ent["grid"].get<int>();
            if (grid == -1) {
                validate_grid(T);
                grid = T;
                u = zero_time_field(g, grid);
            } else if (T != grid) {
                throw ConfigError("time entries disagree on the grid size");
            }
            const EntryIndex row = entry_from_json(g, r, ent["row"]);
            const EntryIndex col = entry_from_json(g, r, ent["col"]);
            const json& samples = ent["samples"];
            if (!samples.is_array() || samples.size() != static_cast<std::size_t>(grid) + 1)
                throw ConfigError("time samples must cover the closed grid (T+1 values)");
            std::vector<cplx>& slot = u.entry_mut(r, row, col);
            for (std::size_t k = 0; k < samples.size(); ++k)
                slot[k] = complex_from_json(samples[k], "time sample");
        }
    }
    if (grid == -1) throw ConfigError("time coefficient file holds no entries");
    return u;
}

inline void save_time_field(const TimeCoefficientField& u, const std::string& path) {
    detail::spill(path, time_field_to_json(u).dump(1) + "\n");
}

inline TimeCoefficientField load_time_field(const GroupSpec& g, const std::string& path) {
    return time_field_from_json(g, detail::parse_json_file(path));
}

// ------------------------------------------------------------- operators

/// Tabulated symbols ride in coefficient-style files whose matrix is either
/// the 1 x d row of diagonal values or the full d x d diagonal matrix.
inline SymbolTable symbol_table_from_json(const GroupSpec& g, const json& j) {
    if (!j.is_array()) throw ConfigError("symbol table file must be a JSON array");
    SymbolTable table;
    for (const json& rec : j) {
        if (!rec.contains("rep") || !rec.contains("matrix"))
            throw ConfigError("symbol table record needs \"rep\" and \"matrix\"");
        const RepPoint r = rep_from_json(g, rec["rep"]);
        const json& m = rec["matrix"];
        const std::size_t d = static_cast<std::size_t>(r.dim);
        std::vector<cplx> vals(d);
        if (m.is_array() && m.size() == 1 && m[0].is_array() && m[0].size() == d) {
            for (std::size_t i = 0; i < d; ++i)
                vals[i] = complex_from_json(m[0][i], "symbol value");
        } else if (m.is_array() && m.size() == d) {
            for (std::size_t i = 0; i < d; ++i)
                vals[i] = complex_from_json(m[i][i], "symbol value");
        } else {
            throw ConfigError("symbol table matrix must be 1 x d or d x d");
        }
        table.put(r, std::move(vals));
    }
    return table;
}

inline DiagonalSymbol symbol_from_config(const GroupSpec& g, const json& j,
                                         const std::string& field) {
    if (j.is_string()) return make_symbol(g, j.get<std::string>());
    if (j.is_object() && j.contains("table") && j["table"].is_string()) {
        const json tj = detail::parse_json_file(j["table"].get<std::string>());
        return make_table_symbol(g, symbol_table_from_json(g, tj));
    }
    throw ConfigError("config field \"" + field +
                      "\" must be an expression string or {\"table\": path}");
}

inline const json& require_field(const json& cfg, const std::string& name) {
    if (!cfg.contains(name))
        throw ConfigError("config field \"" + name + "\" is missing");
    return cfg.at(name);
}

inline bool is_time_config(const json& cfg) {
    return cfg.contains("D") || cfg.contains("p0") || cfg.contains("grid");
}

inline VekuaConstOp const_op_from_config(const json& cfg) {
    const GroupSpec g = group_from_json(require_field(cfg, "group"));
    DiagonalSymbol L = symbol_from_config(g, require_field(cfg, "L"), "L");
    const cplx p = complex_from_json(require_field(cfg, "p"), "config field \"p\"");
    const cplx q = complex_from_json(require_field(cfg, "q"), "config field \"q\"");
    return make_vekua_const(std::move(L), p, q);
}

inline std::vector<double> profile_from_config(const json& j, int T,
                                               const std::string& field) {
    if (!j.is_object() || !j.contains("form"))
        throw ConfigError("config field \"" + field + "\" needs a \"form\"");
    const std::string form = j["form"].get<std::string>();
    const std::size_t n = static_cast<std::size_t>(T) + 1;
    std::vector<double> out(n, 0.0);
    if (form == "const") {
        const double v = require_field(j, "value").get<double>();
        std::fill(out.begin(), out.end(), v);
    } else if (form == "1-cos") {
        const double scale = j.contains("scale") ? j["scale"].get<double>() : 1.0;
        for (std::size_t k = 0; k < n; ++k)
            out[k] = scale * (1.0 - std::cos(two_pi * static_cast<double>(k) / T));
    } else if (form == "samples") {
        const json& vals = require_field(j, "values");
        if (!vals.is_array() || vals.size() != n)
            throw ConfigError("config field \"" + field +
                              "\" samples must hold T+1 values");
        for (std::size_t k = 0; k < n; ++k) out[k] = vals[k].get<double>();
    } else {
        throw ConfigError("config field \"" + field +
                          "\" has unknown form (use \"1-cos\", \"const\", \"samples\")");
    }
    return out;
}

inline VekuaTimeOp time_op_from_config(const json& cfg) {
    const GroupSpec g = group_from_json(require_field(cfg, "group"));
    DiagonalSymbol D = symbol_from_config(g, require_field(cfg, "D"), "D");
    const double p0 = require_field(cfg, "p0").get<double>();
    const double lambda = require_field(cfg, "lambda").get<double>();
    const double delta = require_field(cfg, "delta").get<double>();
    const cplx alpha = complex_from_json(require_field(cfg, "alpha"),
                                         "config field \"alpha\"");
    const int T = require_field(cfg, "grid").get<int>();
    validate_grid(T);
    TimeProfiles pr = build_profiles(profile_from_config(require_field(cfg, "q"), T, "q"),
                                     profile_from_config(require_field(cfg, "s"), T, "s"),
                                     T);
    return make_vekua_time(std::move(D), p0, lambda, delta, alpha, std::move(pr));
}

/// Normalized round-trip form of a parsed config: reserializing a config
/// parsed from this writer's output reproduces it verbatim.
inline json const_op_to_config(const VekuaConstOp& P, const json& original_L) {
    return json{{"group", group_to_json(P.L.group)},
                {"L", original_L},
                {"p", complex_to_json(P.p)},
                {"q", complex_to_json(P.q)}};
}

// --------------------------------------------------------------- reports

inline json fit_to_json(const PowerLawFit& fit) {
    return json{{"constant", fit.constant},
                {"exponent", fit.exponent},
                {"max_residual", fit.max_residual},
                {"identically_zero", fit.identically_zero},
                {"n_used", fit.n_used},
                {"n_zero", fit.n_zero}};
}

inline json report_header(double cutoff, json tolerances) {
    return json{{"version", version},
                {"cutoff", cutoff},
                {"tolerances", std::move(tolerances)},
                {"caveat", "truncation-limited"}};
}

inline json diophantine_report_to_json(const DiophantineReport& rep) {
    json out = report_header(rep.cutoff, json{{"zero_tol_base", rep.zero_tol_base},
                                              {"zero_tol_scaling", "<xi>^(2K)"}});
    out["min_abs_disc"] =
        std::isfinite(rep.min_abs_nonzero) ? rep.min_abs_nonzero : 0.0;
    json zeros = json::array();
    for (const ZeroMode& z : rep.zeros)
        zeros.push_back(json{{"rep", rep_to_json(z.rep)},
                             {"row", entry_to_json(z.row)},
                             {"abs_det", z.abs_det}});
    out["zeros"] = std::move(zeros);
    json shells = json::array();
    for (const auto& [w, s] : rep.shells)
        shells.push_back(json{{"weight", w},
                              {"min_abs_disc",
                               std::isfinite(s.min_nonzero) ? s.min_nonzero : 0.0},
                              {"zero_count", s.zero_count},
                              {"mode_count", s.mode_count}});
    out["shells"] = std::move(shells);
    out["dc_fit"] = fit_to_json(rep.dc_fit);
    out["dc_lower_constant"] = rep.dc_lower_c;
    out["dcprime_fit"] = fit_to_json(rep.dcprime_fit);
    out["dcprime_lower_constant"] = rep.dcprime_lower_c;
    out["verdict_gh"] = to_string(rep.verdict_gh);
    out["verdict_gs"] = to_string(rep.verdict_gs);
    return out;
}

inline std::string shells_to_csv(const DiophantineReport& rep) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "weight,min_abs_disc,zero_count\n";
    for (const auto& [w, s] : rep.shells)
        ss << w << ',' << (std::isfinite(s.min_nonzero) ? s.min_nonzero : 0.0) << ','
           << s.zero_count << '\n';
    return ss.str();
}

inline json hypothesis_report_to_json(const HypothesisReport& rep) {
    json out = report_header(rep.cutoff, json{{"equality_tol", 1e-12}});
    out["a_ok"] = rep.a_ok;
    out["b_ok"] = rep.b_ok;
    out["b_offenders"] = rep.b_offenders;
    out["c_fit"] = fit_to_json(rep.c_fit);
    out["c_c0"] = rep.c_c0;
    out["c_j0"] = rep.c_j0;
    out["c_ok"] = rep.c_ok;
    out["d_applicable"] = rep.d_applicable;
    if (rep.d_applicable) {
        out["d_log_constant"] = rep.d_log_c;
        out["d_growth_fit"] = fit_to_json(rep.d_growth);
        out["d_ok"] = rep.d_ok;
        out["d_offenders"] = rep.d_offenders;
    }
    json eshells = json::array();
    for (const auto& [w, sh] : rep.e_shell_min)
        eshells.push_back(json{{"weight", w},
                               {"min_plus", sh.plus},
                               {"min_minus", sh.minus}});
    out["e_shell_min"] = std::move(eshells);
    out["e_min"] = std::isfinite(rep.e_min) ? rep.e_min : 0.0;
    out["e_fit"] = fit_to_json(rep.e_fit);
    out["e_ok"] = rep.e_ok;
    out["e_offenders"] = rep.e_offenders;
    out["all_ok"] = rep.all_ok();
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    detail::spill(path, text);
}

inline void write_report(const json& report, const std::string& path) {
    detail::spill(path, report.dump(1) + "\n");
}

/// report.json -> report<suffix>; used to place sibling CSV and field files
/// next to the main report deterministically.
inline std::string sibling_path(const std::string& base, const std::string& suffix) {
    const std::size_t slash = base.find_last_of('/');
    const std::size_t dot = base.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return base + suffix;
    return base.substr(0, dot) + suffix;
}

} // namespace vekua
