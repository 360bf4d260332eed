#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vekua/base.hpp"
#include "vekua/field.hpp"
#include "vekua/group.hpp"
#include "vekua/powerlaw.hpp"

namespace vekua {

/// Generators admitted in symbol expressions.  Only these two are diagonal;
/// the ladder actions live on fields, not in expressions.
enum class Generator { d0, Dt };

struct SymbolTerm {
    cplx coeff{0.0, 0.0};
    int factor = 0;
    Generator gen = Generator::d0;
    int power = 1;

    bool operator==(const SymbolTerm& o) const {
        return coeff == o.coeff && factor == o.factor && gen == o.gen && power == o.power;
    }
};

/// Values of a tabulated symbol: one complex vector of length d per rep.
struct SymbolTable {
    std::vector<RepPoint> reps; // sorted by RepOrder
    std::vector<std::vector<cplx>> vals;

    void put(const RepPoint& r, std::vector<cplx> v) {
        const auto it = std::lower_bound(reps.begin(), reps.end(), r, RepOrder{});
        const std::size_t i = static_cast<std::size_t>(it - reps.begin());
        if (it != reps.end() && *it == r) {
            vals[i] = std::move(v);
            return;
        }
        reps.insert(it, r);
        vals.insert(vals.begin() + i, std::move(v));
    }

    const std::vector<cplx>* get(const RepPoint& r) const {
        const auto it = std::lower_bound(reps.begin(), reps.end(), r, RepOrder{});
        if (it == reps.end() || !(*it == r)) return nullptr;
        return &vals[static_cast<std::size_t>(it - reps.begin())];
    }
};

/// Normalized term list, optionally extended by a tabulated part.
struct SymbolExpr {
    std::vector<SymbolTerm> terms;
    std::optional<SymbolTable> tabulated;
};

namespace detail {

inline bool term_order(const SymbolTerm& a, const SymbolTerm& b) {
    if (a.factor != b.factor) return a.factor < b.factor;
    if (a.gen != b.gen) return a.gen < b.gen;
    return a.power < b.power;
}

inline void normalize_terms(std::vector<SymbolTerm>& terms) {
    std::sort(terms.begin(), terms.end(), term_order);
    std::vector<SymbolTerm> merged;
    for (const auto& t : terms) {
        if (!merged.empty() && merged.back().factor == t.factor &&
            merged.back().gen == t.gen && merged.back().power == t.power) {
            merged.back().coeff += t.coeff;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const SymbolTerm& t) {
        return t.coeff.real() == 0.0 && t.coeff.imag() == 0.0;
    });
    terms = std::move(merged);
}

struct SymbolParser {
    const std::string& s;
    const GroupSpec& g;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
    bool eof() {
        skip_ws();
        return i >= s.size();
    }
    char peek() {
        skip_ws();
        return i < s.size() ? s[i] : '\0';
    }

    [[noreturn]] void fail(const std::string& what, std::size_t at) {
        throw ParseError(at, what);
    }

    double number() {
        skip_ws();
        const std::size_t at = i;
        double v = 0.0;
        const auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr == s.data() + i)
            fail("malformed number", at);
        i = static_cast<std::size_t>(res.ptr - s.data());
        return v;
    }

    long integer() {
        skip_ws();
        const std::size_t at = i;
        long v = 0;
        const auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr == s.data() + i)
            fail("malformed integer", at);
        i = static_cast<std::size_t>(res.ptr - s.data());
        return v;
    }

    // number with optional 'i' suffix, optionally signed when allow_sign
    cplx component(bool allow_sign) {
        skip_ws();
        double sign = 1.0;
        if (allow_sign && (peek() == '+' || peek() == '-')) {
            if (s[i] == '-') sign = -1.0;
            ++i;
        }
        const double v = sign * number();
        if (i < s.size() && s[i] == 'i') {
            ++i;
            return cplx{0.0, v};
        }
        return cplx{v, 0.0};
    }

    cplx complex_literal() {
        skip_ws();
        const std::size_t at = i;
        if (peek() == '(') {
            ++i;
            cplx v = component(true);
            skip_ws();
            if (peek() == '+' || peek() == '-') v += component(true);
            skip_ws();
            if (peek() != ')') fail("malformed complex literal, expected ')'", at);
            ++i;
            return v;
        }
        return component(false);
    }

    int resolve_factor(Generator gen, std::size_t at) {
        const Factor want = (gen == Generator::d0) ? Factor::sphere3 : Factor::circle;
        skip_ws();
        if (peek() == '@') {
            ++i;
            const long f = integer();
            if (f < 0 || f >= static_cast<long>(g.n_factors()))
                fail("factor index out of range", at);
            if (g.factors[static_cast<std::size_t>(f)] != want)
                fail(std::string(gen == Generator::d0 ? "d0" : "Dt") + " requires a " +
                         (want == Factor::sphere3 ? "sphere3" : "circle") + " factor",
                     at);
            return static_cast<int>(f);
        }
        int found = -1, count = 0;
        for (std::size_t f = 0; f < g.n_factors(); ++f) {
            if (g.factors[f] == want) {
                found = static_cast<int>(f);
                ++count;
            }
        }
        if (count == 0)
            fail(std::string(gen == Generator::d0 ? "d0" : "Dt") + " requires a " +
                     (want == Factor::sphere3 ? "sphere3" : "circle") + " factor",
                 at);
        if (count > 1)
            fail("generator is ambiguous here, tag a factor with '@'", at);
        return found;
    }

    SymbolTerm term(double sign) {
        SymbolTerm t;
        t.coeff = cplx{sign, 0.0};
        bool saw_gen = false;
        while (true) {
            skip_ws();
            const std::size_t at = i;
            if (eof()) break;
            const char c = peek();
            if (c == 'd' || c == 'D') {
                if (saw_gen) fail("unexpected second generator in term", at);
                if (s.compare(i, 2, "d0") == 0) {
                    t.gen = Generator::d0;
                } else if (s.compare(i, 2, "Dt") == 0) {
                    t.gen = Generator::Dt;
                } else {
                    fail("unknown generator, expected d0 or Dt", at);
                }
                i += 2;
                t.factor = resolve_factor(t.gen, at);
                skip_ws();
                if (peek() == '^') {
                    ++i;
                    const std::size_t pat = i;
                    const long p = integer();
                    if (p < 1) fail("power must be at least 1", pat);
                    t.power = static_cast<int>(p);
                }
                saw_gen = true;
                break;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(') {
                t.coeff *= complex_literal();
                skip_ws();
                if (peek() == '*') ++i;
                continue;
            }
            fail("expected a coefficient or generator", at);
        }
        if (!saw_gen) fail("term lacks a generator", i);
        return t;
    }

    SymbolExpr expr() {
        SymbolExpr e;
        skip_ws();
        // a bare "0" denotes the zero symbol
        if (s.compare(i, 1, "0") == 0) {
            std::size_t j = i + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
            if (j >= s.size()) {
                i = j;
                return e;
            }
        }
        double sign = 1.0;
        if (peek() == '-') {
            ++i;
            sign = -1.0;
        }
        e.terms.push_back(term(sign));
        while (!eof()) {
            const std::size_t at = i;
            const char c = peek();
            if (c == '+') {
                ++i;
                e.terms.push_back(term(1.0));
            } else if (c == '-') {
                ++i;
                e.terms.push_back(term(-1.0));
            } else {
                fail("expected '+' or '-' between terms", at);
            }
        }
        normalize_terms(e.terms);
        return e;
    }
};

inline std::string print_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string print_coeff(cplx c) {
    if (c.imag() == 0.0) return print_double(c.real());
    if (c.real() == 0.0) return print_double(c.imag()) + "i";
    return "(" + print_double(c.real()) + (c.imag() < 0 ? "" : "+") +
           print_double(c.imag()) + "i)";
}

} // namespace detail

inline SymbolExpr parse_symbol(const std::string& text, const GroupSpec& group) {
    if (group.factors.empty()) throw ConfigError("group spec has no factors");
    detail::SymbolParser p{text, group};
    return p.expr();
}

/// Canonical rendering; parse_symbol(print_symbol(e)) reproduces e's terms.
inline std::string print_symbol(const SymbolExpr& e) {
    if (e.terms.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < e.terms.size(); ++i) {
        const SymbolTerm& t = e.terms[i];
        cplx c = t.coeff;
        if (i == 0) {
            if (c.imag() == 0.0 && c.real() < 0) {
                out += "-";
                c = -c;
            }
        } else {
            if (c.imag() == 0.0 && c.real() < 0) {
                out += " - ";
                c = -c;
            } else {
                out += " + ";
            }
        }
        if (!(c.real() == 1.0 && c.imag() == 0.0)) out += detail::print_coeff(c) + "*";
        out += (t.gen == Generator::d0) ? "d0" : "Dt";
        out += "@" + std::to_string(t.factor);
        if (t.power != 1) out += "^" + std::to_string(t.power);
    }
    return out;
}

namespace detail {

inline cplx ipow(cplx base, int p) {
    cplx r{1.0, 0.0};
    for (int k = 0; k < p; ++k) r *= base;
    return r;
}

/// Index of a factor among the sphere3 factors (for EntryIndex addressing).
inline int sphere_slot(const GroupSpec& g, int factor) {
    int s = 0;
    for (int f = 0; f < factor; ++f)
        if (g.factors[static_cast<std::size_t>(f)] == Factor::sphere3) ++s;
    return s;
}

} // namespace detail

/// sigma_m(xi) for every row entry m of the rep, in flat row order.
inline std::vector<cplx> eval_symbol(const SymbolExpr& e, const GroupSpec& g,
                                     const RepPoint& rep) {
    std::vector<cplx> out(static_cast<std::size_t>(rep.dim), cplx{0.0, 0.0});
    if (e.tabulated) {
        const std::vector<cplx>* v = e.tabulated->get(rep);
        if (!v) throw ConfigError("symbol undefined at rep " + rep_label(rep));
        if (static_cast<int>(v->size()) != rep.dim)
            throw ConfigError("tabulated symbol has wrong length at rep " + rep_label(rep));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*v)[i];
    }
    if (e.terms.empty()) return out;
    const auto entries = rep_entries(g, rep);
    for (int r = 0; r < rep.dim; ++r) {
        cplx acc{0.0, 0.0};
        for (const SymbolTerm& t : e.terms) {
            double base;
            if (t.gen == Generator::Dt) {
                base = static_cast<double>(rep.idx[static_cast<std::size_t>(t.factor)]);
            } else {
                const int slot = detail::sphere_slot(g, t.factor);
                base = 0.5 * entries[static_cast<std::size_t>(r)]
                                 .twice_m[static_cast<std::size_t>(slot)];
            }
            acc += t.coeff * detail::ipow(cplx{base, 0.0}, t.power);
        }
        out[static_cast<std::size_t>(r)] += acc;
    }
    return out;
}

/// A diagonal left-invariant operator: group, expression body (terms and/or
/// table), an overall complex scale, and the declared growth order K.
struct DiagonalSymbol {
    GroupSpec group;
    SymbolExpr body;
    cplx scale{1.0, 0.0};
    int declared_order = 0;

    std::vector<cplx> eval(const RepPoint& rep) const {
        std::vector<cplx> v = eval_symbol(body, group, rep);
        if (!(scale.real() == 1.0 && scale.imag() == 0.0))
            for (cplx& z : v) z *= scale;
        return v;
    }

    DiagonalSymbol scaled(cplx f) const {
        DiagonalSymbol s = *this;
        s.scale *= f;
        return s;
    }
};

inline DiagonalSymbol make_symbol(const GroupSpec& g, const std::string& text) {
    DiagonalSymbol s;
    s.group = g;
    s.body = parse_symbol(text, g);
    int k = 0;
    for (const auto& t : s.body.terms) k = std::max(k, t.power);
    s.declared_order = k;
    return s;
}

/// Tabulated symbol; declared_order < 0 requests a growth fit over the
/// table's own reps (0 when the table is too small to fit).
inline DiagonalSymbol make_table_symbol(const GroupSpec& g, SymbolTable table,
                                        int declared_order = -1) {
    DiagonalSymbol s;
    s.group = g;
    s.body.tabulated = std::move(table);
    if (declared_order >= 0) {
        s.declared_order = declared_order;
        return s;
    }
    std::vector<double> w, v;
    for (std::size_t i = 0; i < s.body.tabulated->reps.size(); ++i) {
        double m = 0.0;
        for (const cplx& z : s.body.tabulated->vals[i]) m = std::max(m, std::abs(z));
        w.push_back(s.body.tabulated->reps[i].weight);
        v.push_back(m);
    }
    s.declared_order = 0;
    try {
        const PowerLawFit fit = fit_shell_extrema(w, v, true);
        if (!fit.identically_zero)
            s.declared_order = std::max(0, static_cast<int>(std::ceil(fit.exponent - 0.1)));
    } catch (const ConfigError&) {
        // too few shells to fit; keep order 0
    }
    return s;
}

struct CompatReport {
    bool compat = true;
    PowerLawFit growth;
    std::vector<std::string> violations;
};

/// Checks conjugation compatibility sigma(conj xi) = conj sigma(xi) at every
/// enumerated rep, and fits the growth bound |sigma_m(xi)| <= C <xi>^K.
/// Conjugation keeps every sphere3 spin, so the two symbol vectors align
/// entry for entry in flat order.
inline CompatReport check_diagonal_compat(const DiagonalSymbol& sym, double cutoff) {
    CompatReport rep;
    const auto reps = enumerate_reps(sym.group, cutoff);
    std::vector<double> w, v;
    for (const RepPoint& r : reps) {
        std::vector<cplx> here;
        try {
            here = sym.eval(r);
        } catch (const ConfigError& e) {
            rep.compat = false;
            rep.violations.push_back(e.what());
            continue;
        }
        double m = 0.0;
        for (const cplx& z : here) m = std::max(m, std::abs(z));
        w.push_back(r.weight);
        v.push_back(m);

        const ConjRule rule = conjugate_rep(sym.group, r);
        std::vector<cplx> there;
        try {
            there = sym.eval(rule.target);
        } catch (const ConfigError& e) {
            rep.compat = false;
            rep.violations.push_back(e.what());
            continue;
        }
        const auto entries = rep_entries(sym.group, r);
        for (int i = 0; i < r.dim; ++i) {
            const cplx a = here[static_cast<std::size_t>(i)];
            const cplx b = std::conj(there[static_cast<std::size_t>(i)]);
            if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(a))) {
                rep.compat = false;
                rep.violations.push_back(
                    "sigma(conj xi) != conj sigma(xi) at rep " + rep_label(r) + " entry " +
                    entry_label(entries[static_cast<std::size_t>(i)]));
            }
        }
    }
    try {
        rep.growth = fit_shell_extrema(w, v, true, FitMode::upper_growth);
    } catch (const ConfigError&) {
        // not enough shells at this cutoff; growth stays default
    }
    return rep;
}

inline CoefficientField apply_multiplier(const DiagonalSymbol& sigma,
                                         const CoefficientField& u) {
    if (!(sigma.group == u.group))
        throw ConfigError("symbol and field live on different groups");
    return apply_row_multiplier(u, [&](const RepPoint& r) { return sigma.eval(r); });
}

enum class LadderKind { plus, minus, zero };

/// The table weight attached to column index n (doubled: tn) at spin tl/2.
inline double ladder_table_weight(LadderKind which, int tl, int tn) {
    const double l = 0.5 * tl, n = 0.5 * tn;
    switch (which) {
    case LadderKind::plus: return -std::sqrt((l - n) * (l + n + 1.0));
    case LadderKind::minus: return -std::sqrt((l + n) * (l - n + 1.0));
    case LadderKind::zero: return n;
    }
    return 0.0;
}

/// Induced action of the ladder operators on coefficients.  In coefficient
/// space the shift runs over the row index: (d+ u)(xi)_{mn} picks up
/// u(xi)_{m-1,n} with the table weight, (d- u)(xi)_{mn} picks up u(xi)_{m+1,n},
/// and d0 scales rows in place.  Out-of-range sources are zero.
inline CoefficientField apply_ladder(const CoefficientField& u, LadderKind which,
                                     int factor) {
    const GroupSpec& g = u.group;
    if (factor < 0 || factor >= static_cast<int>(g.n_factors()) ||
        g.factors[static_cast<std::size_t>(factor)] != Factor::sphere3)
        throw ConfigError("ladder actions need a sphere3 factor");
    const int slot = detail::sphere_slot(g, factor);

    CoefficientField out = zero_field(g);
    for (const auto& rep : u.reps) out.ensure(rep);
    for (std::size_t i = 0; i < out.reps.size(); ++i) {
        const RepPoint& rep = out.reps[i];
        const std::size_t src = u.find(rep);
        if (src == CoefficientField::npos) continue;
        const int tl = rep.idx[static_cast<std::size_t>(factor)];
        const auto entries = rep_entries(g, rep);
        for (int r = 0; r < rep.dim; ++r) {
            const int tm = entries[static_cast<std::size_t>(r)]
                               .twice_m[static_cast<std::size_t>(slot)];
            double weight = 0.0;
            int tm_src = tm;
            switch (which) {
            case LadderKind::zero:
                weight = 0.5 * tm;
                break;
            case LadderKind::plus:
                // source row has m-1; table weight at n = m-1
                tm_src = tm - 2;
                weight = ladder_table_weight(LadderKind::plus, tl, tm - 2);
                break;
            case LadderKind::minus:
                tm_src = tm + 2;
                weight = ladder_table_weight(LadderKind::minus, tl, tm + 2);
                break;
            }
            if (std::abs(tm_src) > tl || weight == 0.0) continue;
            EntryIndex src_entry = entries[static_cast<std::size_t>(r)];
            src_entry.twice_m[static_cast<std::size_t>(slot)] = tm_src;
            const int rs = flat_of_entry(g, rep, src_entry);
            for (int c = 0; c < rep.dim; ++c)
                out.mats[i][static_cast<std::size_t>(r) * rep.dim + c] =
                    weight * u.mats[src][static_cast<std::size_t>(rs) * rep.dim + c];
        }
    }
    return out;
}

} // namespace vekua
