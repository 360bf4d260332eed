#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vekua/base.hpp"
#include "vekua/field.hpp"
#include "vekua/group.hpp"
#include "vekua/parallel.hpp"
#include "vekua/powerlaw.hpp"
#include "vekua/symbol.hpp"

namespace vekua {

/// Constant-coefficient operator Pu = Lu - q*u - p*conj(u), p != 0.
struct VekuaConstOp {
    DiagonalSymbol L;
    cplx p{1.0, 0.0};
    cplx q{0.0, 0.0};
};

inline VekuaConstOp make_vekua_const(DiagonalSymbol L, cplx p, cplx q) {
    if (p == cplx{0.0, 0.0}) throw ConfigError("vekua operator needs p != 0");
    return VekuaConstOp{std::move(L), p, q};
}

/// A mode is singular when |det| <= this; the scale-aware factor tracks the
/// discriminant's own growth <xi>^{2K} so structural zeros are separated
/// from small divisors at every weight.
inline double singular_tol(const VekuaConstOp& P, const RepPoint& rep) {
    const double scale = std::pow(rep.weight, 2.0 * P.L.declared_order);
    return 1e-12 * std::max(1.0, scale);
}

/// Conjugate-partner bookkeeping of one coefficient slot (rep, row, col):
/// where the partner coefficient lives, the attached phase, and whether the
/// pair collapses to a single slot.
struct PairInfo {
    RepPoint partner_rep;
    EntryIndex partner_row, partner_col;
    double phase = 1.0;
    bool self_paired = false;
};

inline PairInfo pair_info(const GroupSpec& g, const RepPoint& rep, const EntryIndex& row,
                          const EntryIndex& col) {
    const ConjRule rule = conjugate_rep(g, rep);
    PairInfo pi;
    pi.partner_rep = rule.target;
    pi.partner_row = rule.entry_map(row);
    pi.partner_col = rule.entry_map(col);
    pi.phase = rule.phase(row, col);
    pi.self_paired =
        rule.self_dual && pi.partner_row == row && pi.partner_col == col;
    return pi;
}

inline std::string mode_label(const RepPoint& rep, const EntryIndex& row,
                              const EntryIndex& col) {
    return rep_label(rep) + entry_label(row) + entry_label(col);
}

/// The coupled 2x2 system in the unknowns x = u(xi)_{row,col} and
/// W = phase * conj(u(conj xi)_{-row,-col}):
///   a11 x + a12 W = f(xi)_{row,col}
///   a21 x + a22 W = phase * conj(f(conj xi)_{-row,-col})
struct ModeSystem2x2 {
    RepPoint rep;
    EntryIndex row, col;
    PairInfo pair;
    cplx a11, a12, a21, a22;
    cplx det;
    cplx sigma;       // sigma_row(xi)
    cplx sigma_tilde; // conj of sigma at the partner slot
};

/// Assembled from P-hat at the mode and at its conjugate partner; no closed
/// form is ever substituted.
inline ModeSystem2x2 build_mode_system(const VekuaConstOp& P, const RepPoint& rep,
                                       const EntryIndex& row, const EntryIndex& col) {
    ModeSystem2x2 sys;
    sys.rep = rep;
    sys.row = row;
    sys.col = col;
    sys.pair = pair_info(P.L.group, rep, row, col);
    check_entry(P.L.group, rep, row);
    check_entry(P.L.group, rep, col);

    const std::vector<cplx> here = P.L.eval(rep);
    const std::vector<cplx> there = P.L.eval(sys.pair.partner_rep);
    sys.sigma = here[static_cast<std::size_t>(flat_of_entry(P.L.group, rep, row))];
    sys.sigma_tilde = std::conj(there[static_cast<std::size_t>(
        flat_of_entry(P.L.group, sys.pair.partner_rep, sys.pair.partner_row))]);

    sys.a11 = sys.sigma - P.q;
    sys.a12 = -P.p;
    sys.a21 = -std::conj(P.p);
    sys.a22 = sys.sigma_tilde - std::conj(P.q);
    sys.det = sys.a11 * sys.a22 - sys.a12 * sys.a21;
    return sys;
}

inline cplx discriminant(const VekuaConstOp& P, const RepPoint& rep,
                         const EntryIndex& row) {
    return build_mode_system(P, rep, row, row).det;
}

/// Compatibility residual of the singular-mode relation
/// (sigma_tilde - conj q) f1 + p * phase * conj(f2); zero iff the pair
/// (f1, f2) lies in the range of the singular system.
inline cplx admissibility_residual(const ModeSystem2x2& sys, cplx f1, cplx f2,
                                   const VekuaConstOp& P) {
    return sys.a22 * f1 + P.p * sys.pair.phase * std::conj(f2);
}

struct ModeSolution {
    cplx at_mode{0.0, 0.0};    // u(xi)_{row,col}
    cplx at_partner{0.0, 0.0}; // u(conj xi)_{-row,-col}
    bool singular = false;
};

namespace detail {

/// Minimal-norm solution of the rank-deficient self-paired equation
/// a*z + b*conj(z) = f, assuming consistency was already checked.
inline cplx selfpaired_min_norm(cplx a, cplx b, cplx f) {
    const double m11 = (a + b).real(), m12 = -(a - b).imag();
    const double m21 = (a + b).imag(), m22 = (a - b).real();
    const double r1 = m11 * m11 + m12 * m12;
    const double r2 = m21 * m21 + m22 * m22;
    if (r1 >= r2) {
        if (r1 == 0.0) return {0.0, 0.0};
        const double beta = f.real() / r1;
        return {m11 * beta, m12 * beta};
    }
    const double beta = f.imag() / r2;
    return {m21 * beta, m22 * beta};
}

} // namespace detail

/// Solves one mode pair.  fhat_pair = (f at (rep,row,col), f at the
/// conjugate-partner slot).  On a singular mode the paper's selected
/// solution is returned when the pair is admissible; otherwise an
/// AdmissibilityError carries the mode.
inline ModeSolution cramer_solve_mode(const VekuaConstOp& P, const RepPoint& rep,
                                      const EntryIndex& row, const EntryIndex& col,
                                      std::pair<cplx, cplx> fhat_pair) {
    const ModeSystem2x2 sys = build_mode_system(P, rep, row, col);
    const cplx f1 = fhat_pair.first, f2 = fhat_pair.second;
    const double phi = sys.pair.phase;
    const cplx b1 = f1;
    const cplx b2 = phi * std::conj(f2);

    ModeSolution sol;
    if (std::abs(sys.det) > singular_tol(P, rep)) {
        const cplx x = (b1 * sys.a22 - sys.a12 * b2) / sys.det;
        const cplx w = (sys.a11 * b2 - sys.a21 * b1) / sys.det;
        sol.at_mode = x;
        sol.at_partner = sys.pair.self_paired ? x : phi * std::conj(w);
        return sol;
    }

    sol.singular = true;
    const cplx resid = admissibility_residual(sys, f1, f2, P);
    if (std::abs(resid) > 1e-10 * (1.0 + std::abs(f1)))
        throw AdmissibilityError("inadmissible at singular mode",
                                 {mode_label(rep, row, col)});
    if (sys.pair.self_paired) {
        const cplx x = detail::selfpaired_min_norm(sys.a11, -P.p * phi, f1);
        sol.at_mode = x;
        sol.at_partner = x;
        return sol;
    }
    // selected point on the solution line: u at the mode vanishes
    sol.at_mode = {0.0, 0.0};
    sol.at_partner = -phi * std::conj(f1) / std::conj(P.p);
    return sol;
}

inline CoefficientField apply_vekua(const VekuaConstOp& P, const CoefficientField& u) {
    if (!(P.L.group == u.group))
        throw ConfigError("operator and field live on different groups");
    const CoefficientField lu = apply_multiplier(P.L, u);
    const CoefficientField rest = field_combine(P.q, u, P.p, conj_field(u));
    return field_combine({1.0, 0.0}, lu, {-1.0, 0.0}, rest);
}

struct AdmissibilityReport {
    bool admissible = true;
    std::vector<std::string> violations;
};

/// Checks the compatibility relation at every singular mode of f's support.
inline AdmissibilityReport is_admissible(const VekuaConstOp& P, const CoefficientField& f,
                                         double cutoff) {
    AdmissibilityReport rep;
    for (const RepPoint& r : f.reps) {
        if (r.weight > cutoff * (1.0 + 1e-12)) continue;
        const auto entries = rep_entries(f.group, r);
        for (const EntryIndex& row : entries) {
            const ModeSystem2x2 sys = build_mode_system(P, r, row, row);
            if (std::abs(sys.det) > singular_tol(P, r)) continue;
            for (const EntryIndex& col : entries) {
                const PairInfo pi = pair_info(f.group, r, row, col);
                const cplx f1 = f.get(r, row, col);
                const cplx f2 = f.get(pi.partner_rep, pi.partner_row, pi.partner_col);
                ModeSystem2x2 full = sys;
                full.col = col;
                full.pair = pi;
                const cplx resid = admissibility_residual(full, f1, f2, P);
                if (std::abs(resid) > 1e-10 * (1.0 + std::abs(f1))) {
                    rep.admissible = false;
                    rep.violations.push_back(mode_label(r, row, col));
                }
            }
        }
    }
    return rep;
}

/// Mode-by-mode Cramer solve over the conjugation-closed support of f.
/// Throws AdmissibilityError listing every offending mode when f is not in
/// the operator's range.
inline CoefficientField solve_const(const VekuaConstOp& P, const CoefficientField& f,
                                    double cutoff) {
    if (!(P.L.group == f.group))
        throw ConfigError("operator and field live on different groups");
    const GroupSpec& g = f.group;
    CoefficientField u = zero_field(g);
    CoefficientField fc = f; // closure may add the partner of a stored rep
    for (const RepPoint& r : f.reps) fc.ensure(r);
    for (const RepPoint& r : fc.reps) u.ensure(r);

    std::vector<std::vector<std::string>> bad(fc.reps.size());
    parallel_for(fc.reps.size(), [&](std::size_t i) {
        const RepPoint r = fc.reps[i];
        if (r.weight > cutoff * (1.0 + 1e-12)) return;
        const auto entries = rep_entries(g, r);
        for (const EntryIndex& row : entries) {
            for (const EntryIndex& col : entries) {
                const PairInfo pi = pair_info(g, r, row, col);
                // solve each pair once, from its canonical representative
                if (!pi.self_paired) {
                    const bool canonical =
                        RepOrder{}(r, pi.partner_rep) ||
                        (r == pi.partner_rep &&
                         flat_of_entry(g, r, row) * r.dim + flat_of_entry(g, r, col) <
                             flat_of_entry(g, r, pi.partner_row) * r.dim +
                                 flat_of_entry(g, r, pi.partner_col));
                    if (!canonical) continue;
                }
                const cplx f1 = fc.get(r, row, col);
                const cplx f2 = fc.get(pi.partner_rep, pi.partner_row, pi.partner_col);
                try {
                    const ModeSolution sol = cramer_solve_mode(P, r, row, col, {f1, f2});
                    u.set(r, row, col, sol.at_mode);
                    u.set(pi.partner_rep, pi.partner_row, pi.partner_col, sol.at_partner);
                } catch (const AdmissibilityError& e) {
                    bad[i].insert(bad[i].end(), e.modes.begin(), e.modes.end());
                }
            }
        }
    });
    std::vector<std::string> offenders;
    for (auto& b : bad) offenders.insert(offenders.end(), b.begin(), b.end());
    if (!offenders.empty())
        throw AdmissibilityError("right-hand side is not admissible", std::move(offenders));
    return u;
}

enum class GhVerdict { GH_plausible, GH_fail_zero_set_infinite };
enum class GsVerdict { GS_plausible, GS_fail };

inline const char* to_string(GhVerdict v) {
    return v == GhVerdict::GH_plausible ? "GH_plausible" : "GH_fail_zero_set_infinite";
}
inline const char* to_string(GsVerdict v) {
    return v == GsVerdict::GS_plausible ? "GS_plausible" : "GS_fail";
}

struct ZeroMode {
    RepPoint rep;
    EntryIndex row;
    double abs_det = 0.0;
};

struct ShellStat {
    double min_nonzero = std::numeric_limits<double>::infinity();
    int zero_count = 0;
    int mode_count = 0;
};

struct DiophantineReport {
    double cutoff = 1.0;
    double zero_tol_base = 1e-12;
    std::vector<ZeroMode> zeros;
    std::map<double, ShellStat> shells; // keyed by weight
    double min_abs_nonzero = std::numeric_limits<double>::infinity();
    PowerLawFit dc_fit, dcprime_fit;
    double dc_lower_c = 0.0, dcprime_lower_c = 0.0;
    GhVerdict verdict_gh = GhVerdict::GH_plausible;
    GsVerdict verdict_gs = GsVerdict::GS_plausible;
    std::string caveat = "truncation-limited";
};

/// Scans |det| over every (rep, row) mode up to the cutoff.  Zero modes are
/// exact findings; the fits and verdicts are finite-scan evidence only.
/// zero_tol_override > 0 replaces the weight-scaled singular tolerance with
/// a fixed absolute one.
inline DiophantineReport scan_diophantine(const VekuaConstOp& P, double cutoff,
                                          double zero_tol_override = -1.0) {
    DiophantineReport report;
    report.cutoff = cutoff;
    report.zero_tol_base = zero_tol_override > 0.0 ? zero_tol_override : 1e-12;
    const auto reps = enumerate_reps(P.L.group, cutoff);

    std::vector<std::vector<std::pair<EntryIndex, double>>> dets(reps.size());
    parallel_for(reps.size(), [&](std::size_t i) {
        const RepPoint& r = reps[i];
        const auto entries = rep_entries(P.L.group, r);
        dets[i].reserve(entries.size());
        for (const EntryIndex& row : entries)
            dets[i].emplace_back(row, std::abs(discriminant(P, r, row)));
    });

    for (std::size_t i = 0; i < reps.size(); ++i) {
        const RepPoint& r = reps[i];
        ShellStat& shell = report.shells[r.weight];
        const double tol =
            zero_tol_override > 0.0 ? zero_tol_override : singular_tol(P, r);
        for (const auto& [row, ad] : dets[i]) {
            ++shell.mode_count;
            if (ad <= tol) {
                ++shell.zero_count;
                report.zeros.push_back(ZeroMode{r, row, ad});
            } else {
                shell.min_nonzero = std::min(shell.min_nonzero, ad);
                report.min_abs_nonzero = std::min(report.min_abs_nonzero, ad);
            }
        }
    }

    // (DC) fit: shell minima over all modes, shells containing a zero are
    // excluded from the log fit; (DC') fit: minima over nonzero modes.
    std::vector<double> w_dc, v_dc, w_dcp, v_dcp;
    for (const auto& [w, s] : report.shells) {
        if (std::isfinite(s.min_nonzero)) {
            w_dcp.push_back(w);
            v_dcp.push_back(s.min_nonzero);
            if (s.zero_count == 0) {
                w_dc.push_back(w);
                v_dc.push_back(s.min_nonzero);
            }
        }
    }
    auto lower_envelope = [](const std::vector<double>& w, const std::vector<double>& v,
                             const PowerLawFit& fit) {
        double c = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < w.size(); ++i)
            c = std::min(c, v[i] / std::pow(w[i], fit.exponent));
        return std::isfinite(c) ? c : 0.0;
    };
    try {
        report.dc_fit = fit_power_law(w_dc, v_dc, FitMode::decay);
        report.dc_lower_c = lower_envelope(w_dc, v_dc, report.dc_fit);
    } catch (const ConfigError&) {
    }
    try {
        report.dcprime_fit = fit_power_law(w_dcp, v_dcp, FitMode::decay);
        report.dcprime_lower_c = lower_envelope(w_dcp, v_dcp, report.dcprime_fit);
    } catch (const ConfigError&) {
    }

    // zeros recurring across the outer shells signal an infinite zero set
    const double half = 0.5 * (1.0 + cutoff);
    int outer_zero_shells = 0;
    for (const auto& [w, s] : report.shells)
        if (w >= half && s.zero_count > 0) ++outer_zero_shells;
    report.verdict_gh = (outer_zero_shells >= 3) ? GhVerdict::GH_fail_zero_set_infinite
                                                 : GhVerdict::GH_plausible;
    report.verdict_gs = (report.dcprime_fit.n_used >= 3 && report.dcprime_fit.exponent < -8.0)
                            ? GsVerdict::GS_fail
                            : GsVerdict::GS_plausible;
    return report;
}

enum class WitnessKind { gh_zero, gh_necessity, gs_fail };

struct ModeRef {
    RepPoint rep;
    EntryIndex row, col;
};

struct GrowthRow {
    RepPoint rep;
    EntryIndex row, col;
    double abs_det = 0.0;
    double reciprocal = 0.0;
};

struct WitnessBundle {
    WitnessKind kind = WitnessKind::gh_zero;
    CoefficientField u; // gh_zero, gh_necessity
    CoefficientField f; // gh_necessity, gs_fail
    std::vector<std::string> skipped;
    std::vector<GrowthRow> growth_table; // gs_fail
};

/// Builds the paper's explicit witnesses on the supplied modes.
///   gh_zero: Pu = 0 with non-decaying coefficients; needs det = 0 modes.
///   gh_necessity: pair (u_c, f_c) with P u_c = f_c and f_c = c * det per mode.
///   gs_fail: admissible f whose unique solution has |u| = 1/|det|.
inline WitnessBundle make_witness(const VekuaConstOp& P, WitnessKind kind,
                                  const std::vector<ModeRef>& modes,
                                  cplx c = cplx{1.0, 0.0}) {
    WitnessBundle bundle;
    bundle.kind = kind;
    bundle.u = zero_field(P.L.group);
    bundle.f = zero_field(P.L.group);
    if (kind == WitnessKind::gh_necessity && c == cplx{0.0, 0.0})
        throw ConfigError("gh_necessity witness needs c != 0");

    // slots already written, to skip a mode given together with its partner
    std::vector<std::pair<RepPoint, std::pair<EntryIndex, EntryIndex>>> taken;
    auto is_taken = [&](const RepPoint& r, const EntryIndex& row, const EntryIndex& col) {
        for (const auto& [tr, te] : taken)
            if (tr == r && te.first == row && te.second == col) return true;
        return false;
    };

    for (const ModeRef& m : modes) {
        const ModeSystem2x2 sys = build_mode_system(P, m.rep, m.row, m.col);
        const PairInfo& pi = sys.pair;
        const double phi = pi.phase;
        if (is_taken(m.rep, m.row, m.col)) {
            bundle.skipped.push_back(mode_label(m.rep, m.row, m.col) +
                                     ": already covered by its partner");
            continue;
        }
        const double tol = singular_tol(P, m.rep);

        switch (kind) {
        case WitnessKind::gh_zero: {
            if (std::abs(sys.det) > tol) {
                bundle.skipped.push_back(mode_label(m.rep, m.row, m.col) +
                                         ": det is nonzero");
                continue;
            }
            if (pi.self_paired) {
                // any real multiple of sqrt(p*phi*conj(sigma - q)) solves the
                // self-paired homogeneous equation; |x| = |p| > 0
                const cplx x = std::sqrt(P.p * phi * std::conj(sys.a11));
                bundle.u.set(m.rep, m.row, m.col, x);
            } else {
                bundle.u.set(m.rep, m.row, m.col, sys.a22); // sigma_tilde - conj q
                bundle.u.set(pi.partner_rep, pi.partner_row, pi.partner_col, phi * P.p);
            }
            break;
        }
        case WitnessKind::gh_necessity: {
            const cplx x = sys.a22 * c + P.p * std::conj(c);
            const cplx w = std::conj(P.p) * c + sys.a11 * std::conj(c);
            bundle.u.set(m.rep, m.row, m.col, x);
            bundle.u.set(pi.partner_rep, pi.partner_row, pi.partner_col,
                         phi * std::conj(w));
            bundle.f.set(m.rep, m.row, m.col, c * sys.det);
            bundle.f.set(pi.partner_rep, pi.partner_row, pi.partner_col,
                         phi * std::conj(sys.det) * c);
            break;
        }
        case WitnessKind::gs_fail: {
            if (std::abs(sys.det) <= tol) {
                bundle.skipped.push_back(mode_label(m.rep, m.row, m.col) +
                                         ": det vanishes");
                continue;
            }
            if (pi.self_paired) {
                // the partner slot is the mode itself: no one-sided source
                bundle.skipped.push_back(mode_label(m.rep, m.row, m.col) +
                                         ": self-paired mode");
                continue;
            }
            bundle.f.set(pi.partner_rep, pi.partner_row, pi.partner_col,
                         phi / std::conj(P.p));
            bundle.growth_table.push_back(GrowthRow{m.rep, m.row, m.col,
                                                    std::abs(sys.det),
                                                    1.0 / std::abs(sys.det)});
            break;
        }
        }
        taken.push_back({m.rep, {m.row, m.col}});
        taken.push_back({pi.partner_rep, {pi.partner_row, pi.partner_col}});
    }
    return bundle;
}

} // namespace vekua
