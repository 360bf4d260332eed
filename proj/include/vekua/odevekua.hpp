#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vekua/base.hpp"
#include "vekua/constvekua.hpp"
#include "vekua/field.hpp"
#include "vekua/group.hpp"
#include "vekua/parallel.hpp"
#include "vekua/powerlaw.hpp"
#include "vekua/symbol.hpp"

namespace vekua {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Shared uniform grid over [0, 2pi] with the cumulative tables of the
/// time profiles.  Qt = Q - q0 exactly as stored, so Qt(2pi) = 0 and
/// Qt(0) = -q0.
struct TimeProfiles {
    int grid = 0;                 // T, even, >= 4
    std::vector<double> q, s;     // closed samples, size T+1
    std::vector<double> Q, S, Qt; // cumulative trapezoid tables
    double q0 = 0.0, s0 = 0.0;

    double node(int j) const { return two_pi * j / grid; }
    double step() const { return two_pi / grid; }
};

inline TimeProfiles build_profiles(const std::vector<double>& q_samples,
                                   const std::vector<double>& s_samples, int T) {
    validate_grid(T);
    const std::size_t n = static_cast<std::size_t>(T) + 1;
    if (q_samples.size() != n || s_samples.size() != n)
        throw ConfigError("profile samples must cover the closed grid (T+1 values)");
    TimeProfiles pr;
    pr.grid = T;
    pr.q = q_samples;
    pr.s = s_samples;
    for (double v : pr.q)
        if (v < 0.0) throw ConfigError("q must be nonnegative");
    const double h = pr.step();
    pr.Q.assign(n, 0.0);
    pr.S.assign(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        pr.Q[j] = pr.Q[j - 1] + 0.5 * h * (pr.q[j - 1] + pr.q[j]);
        pr.S[j] = pr.S[j - 1] + 0.5 * h * (pr.s[j - 1] + pr.s[j]);
    }
    pr.q0 = pr.Q[T];
    pr.s0 = pr.S[T];
    if (pr.q0 <= 0.0) throw ConfigError("q is not identically zero must hold");
    pr.Qt.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) pr.Qt[j] = pr.Q[j] - pr.q0;
    return pr;
}

inline TimeProfiles build_profiles(const std::function<double(double)>& q_fn,
                                   const std::function<double(double)>& s_fn, int T) {
    validate_grid(T);
    std::vector<double> qs(static_cast<std::size_t>(T) + 1),
        ss(static_cast<std::size_t>(T) + 1);
    for (int j = 0; j <= T; ++j) {
        const double t = two_pi * j / T;
        qs[static_cast<std::size_t>(j)] = q_fn(t);
        ss[static_cast<std::size_t>(j)] = s_fn(t);
    }
    return build_profiles(qs, ss, T);
}

/// Time-dependent operator P = d/dt - (p0 + i*lambda*q(t))*D
///                             - (s(t) + i*delta*q(t)) - alpha*q(t)*conj.
struct VekuaTimeOp {
    DiagonalSymbol D;
    double p0 = 0.0, lambda = 0.0, delta = 0.0;
    cplx alpha{1.0, 0.0};
    TimeProfiles profiles;
};

inline VekuaTimeOp make_vekua_time(DiagonalSymbol D, double p0, double lambda,
                                   double delta, cplx alpha, TimeProfiles profiles) {
    if (alpha == cplx{0.0, 0.0}) throw ConfigError("time operator needs alpha != 0");
    return VekuaTimeOp{std::move(D), p0, lambda, delta, alpha, std::move(profiles)};
}

namespace detail {

inline cplx sigma_at(const VekuaTimeOp& P, const RepPoint& rep, const EntryIndex& row) {
    const std::vector<cplx> vals = P.D.eval(rep);
    return vals[static_cast<std::size_t>(flat_of_entry(P.D.group, rep, row))];
}

} // namespace detail

/// rho^2 = |alpha|^2 - (lambda*sigma_m + delta)^2, principal root with
/// Re >= 0; a purely imaginary root takes Im >= 0.
inline cplx compute_rho(const VekuaTimeOp& P, const RepPoint& rep, const EntryIndex& row) {
    const cplx mu = P.lambda * detail::sigma_at(P, rep, row) + P.delta;
    const double aa = std::abs(P.alpha);
    if (std::abs(std::abs(mu) - aa) <= 1e-12 * (1.0 + aa))
        throw HypothesisError("hypothesis b) violated at mode " +
                                  rep_label(rep) + entry_label(row),
                              {rep_label(rep) + entry_label(row)});
    cplx rho = std::sqrt(cplx{aa * aa, 0.0} - mu * mu);
    if (rho.real() < 0.0) rho = -rho;
    if (rho.real() == 0.0 && rho.imag() < 0.0) rho = -rho;
    return rho;
}

struct ModeDiag {
    RepPoint rep;
    EntryIndex row;
    cplx sigma;              // a_m + i b_m
    cplx mu;                 // lambda*sigma + delta
    cplx rho;
    std::array<cplx, 4> Mtilde; // row-major 2x2
    std::array<cplx, 4> T_mat, T_inv;
};

/// Columns of T are the eigenvectors V+ = (alpha, rho - i mu) and
/// V- = (alpha, -rho - i mu); T_inv * Mtilde * T = rho * diag(1, -1).
inline ModeDiag mode_diagonalize(const VekuaTimeOp& P, const RepPoint& rep,
                                 const EntryIndex& row) {
    ModeDiag d;
    d.rep = rep;
    d.row = row;
    d.sigma = detail::sigma_at(P, rep, row);
    d.mu = P.lambda * d.sigma + P.delta;
    d.rho = compute_rho(P, rep, row);
    const cplx i_mu = cplx{0.0, 1.0} * d.mu;
    d.Mtilde = {i_mu, P.alpha, std::conj(P.alpha), -i_mu};
    d.T_mat = {P.alpha, P.alpha, d.rho - i_mu, -d.rho - i_mu};
    const cplx inv_det = 1.0 / (-2.0 * P.alpha * d.rho);
    d.T_inv = {inv_det * (-d.rho - i_mu), inv_det * (-P.alpha),
               inv_det * (-d.rho + i_mu), inv_det * P.alpha};
    return d;
}

struct ShellPairMin {
    double plus = std::numeric_limits<double>::infinity();
    double minus = std::numeric_limits<double>::infinity();
};

struct HypothesisReport {
    double cutoff = 1.0;
    bool a_ok = true;
    bool b_ok = true;
    std::vector<std::string> b_offenders;
    PowerLawFit c_fit; // decay fit of per-shell min |rho|
    double c_c0 = 0.0, c_j0 = 0.0;
    bool c_ok = true;
    bool d_applicable = false; // only when p0 != 0
    double d_log_c = 0.0;      // envelope |a_m| <= C log<xi> over <xi> >= 2
    PowerLawFit d_growth;      // growth fit of per-shell max |a_m|
    bool d_ok = true;
    std::vector<std::string> d_offenders;
    std::map<double, ShellPairMin> e_shell_min; // both sign choices per shell
    double e_min = std::numeric_limits<double>::infinity();
    PowerLawFit e_fit; // decay fit of per-shell combined minima
    bool e_ok = true;
    std::vector<std::string> e_offenders;
    std::string caveat = "truncation-limited";

    bool all_ok() const {
        return a_ok && b_ok && c_ok && (!d_applicable || d_ok) && e_ok;
    }
};

/// Scans hypotheses a)-e) up to the cutoff.  a) and b) are exact per mode;
/// c), d), e) are finite-scan fits carrying the truncation caveat.
inline HypothesisReport check_hypotheses(const VekuaTimeOp& P, double cutoff) {
    HypothesisReport rep;
    rep.cutoff = cutoff;
    const double aa = std::abs(P.alpha);
    rep.a_ok = std::abs(std::abs(P.delta) - aa) > 1e-12 * (1.0 + aa);
    rep.d_applicable = P.p0 != 0.0;

    const auto reps = enumerate_reps(P.D.group, cutoff);
    std::vector<double> w_rho, v_rho, w_a, v_a;
    double worst_d = -1.0;
    std::string worst_d_mode;
    double worst_e = std::numeric_limits<double>::infinity();
    std::string worst_e_mode;

    for (const RepPoint& r : reps) {
        for (const EntryIndex& row : rep_entries(P.D.group, r)) {
            const std::string label = rep_label(r) + entry_label(row);
            const cplx sigma = detail::sigma_at(P, r, row);
            cplx rho;
            try {
                rho = compute_rho(P, r, row);
            } catch (const HypothesisError&) {
                rep.b_ok = false;
                rep.b_offenders.push_back(label);
                continue;
            }
            w_rho.push_back(r.weight);
            v_rho.push_back(std::abs(rho));

            if (rep.d_applicable && r.weight >= 2.0) {
                const double ratio = std::abs(sigma.real()) / std::log(r.weight);
                w_a.push_back(r.weight);
                v_a.push_back(std::abs(sigma.real()));
                if (ratio > worst_d) {
                    worst_d = ratio;
                    worst_d_mode = label;
                }
                rep.d_log_c = std::max(rep.d_log_c, ratio);
            }

            const cplx c_exp = sigma * two_pi * P.p0 + P.profiles.s0;
            const cplx base = std::exp(-rho * P.profiles.q0);
            const double dplus = std::abs(base - std::exp(c_exp));
            const double dminus = std::abs(base - std::exp(-c_exp));
            ShellPairMin& sh = rep.e_shell_min[r.weight];
            sh.plus = std::min(sh.plus, dplus);
            sh.minus = std::min(sh.minus, dminus);
            const double dmin = std::min(dplus, dminus);
            if (dmin < worst_e) {
                worst_e = dmin;
                worst_e_mode = label;
            }
            rep.e_min = std::min(rep.e_min, dmin);
            if (dmin <= 1e-12 * (1.0 + std::abs(std::exp(c_exp))))
                rep.e_offenders.push_back(label);
        }
    }

    try {
        rep.c_fit = fit_shell_extrema(w_rho, v_rho, /*reduce_max=*/false, FitMode::decay);
        rep.c_j0 = -rep.c_fit.exponent;
        double c0 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < w_rho.size(); ++i)
            c0 = std::min(c0, v_rho[i] / std::pow(w_rho[i], rep.c_fit.exponent));
        rep.c_c0 = std::isfinite(c0) ? c0 : 0.0;
        rep.c_ok = rep.c_fit.exponent >= -8.0;
    } catch (const ConfigError&) {
    }

    if (rep.d_applicable) {
        try {
            rep.d_growth = fit_shell_extrema(w_a, v_a, /*reduce_max=*/true,
                                             FitMode::upper_growth);
            // logarithmic growth fits a power law with exponent near zero;
            // anything clearly polynomial breaks Eq. (log)
            rep.d_ok = rep.d_growth.identically_zero || rep.d_growth.exponent <= 0.75;
        } catch (const ConfigError&) {
        }
        if (!rep.d_ok && !worst_d_mode.empty()) rep.d_offenders.push_back(worst_d_mode);
    }

    std::vector<double> w_e, v_e;
    for (const auto& [w, sh] : rep.e_shell_min) {
        w_e.push_back(w);
        v_e.push_back(std::min(sh.plus, sh.minus));
    }
    try {
        rep.e_fit = fit_power_law(w_e, v_e, FitMode::decay);
    } catch (const ConfigError&) {
    }
    rep.e_ok = rep.e_offenders.empty();
    if (!rep.e_ok && !worst_e_mode.empty() &&
        std::find(rep.e_offenders.begin(), rep.e_offenders.end(), worst_e_mode) ==
            rep.e_offenders.end())
        rep.e_offenders.push_back(worst_e_mode);
    return rep;
}

struct ModeClosedSolution {
    std::vector<cplx> z1, z2;           // closed grid, size T+1
    std::vector<std::array<cplx, 2>> w; // w = e^{sigma p0 t + S} T z
    std::vector<cplx> u_hat;            // first component of w
    cplx sigma, rho;
    cplx den1, den2;  // boundary denominators of z1 and z2
    cplx boundary;    // e^{sigma p0 2pi + s0}, the (znobordo) factor
};

/// Quadrature evaluation of the closed-form mode solution.  The periodic
/// boundary values are computed from the accumulated integrals, so that
/// z(0) = e^{sigma p0 2pi + s0} z(2pi) holds exactly in floating point.
inline ModeClosedSolution solve_mode_closed(const VekuaTimeOp& P, const RepPoint& rep,
                                            const EntryIndex& row, const EntryIndex& col,
                                            const std::vector<std::array<cplx, 2>>& Gpair) {
    check_entry(P.D.group, rep, col);
    const TimeProfiles& pr = P.profiles;
    const int T = pr.grid;
    const std::size_t n = static_cast<std::size_t>(T) + 1;
    if (Gpair.size() != n)
        throw ConfigError("Gpair must be sampled on the closed grid (T+1 values)");

    const ModeDiag d = mode_diagonalize(P, rep, row);
    ModeClosedSolution sol;
    sol.sigma = d.sigma;
    sol.rho = d.rho;

    const cplx c_exp = d.sigma * P.p0 * two_pi + pr.s0;
    sol.boundary = std::exp(c_exp);
    const cplx decay = std::exp(-d.rho * pr.q0);
    sol.den1 = decay - sol.boundary;
    sol.den2 = 1.0 - sol.boundary / std::exp(d.rho * pr.q0);
    const double scale = std::max(1.0, std::abs(sol.boundary));
    const std::string label = mode_label(rep, row, col);
    if (std::abs(sol.den1) <= 1e-12 * scale || std::abs(sol.den2) <= 1e-12 * scale)
        throw HypothesisError("condition (DCn) violated at mode " + label, {label});

    const double h = pr.step();
    std::vector<cplx> I1(n), I2(n);

    // backward sweep for z1: the kernel exponent rho*(Q(j) - Q(j+1)) has
    // nonpositive real part, so every factor is bounded by 1
    I1[n - 1] = 0.0;
    for (std::size_t j = n - 1; j-- > 0;) {
        const cplx e = std::exp(d.rho * (pr.Q[j] - pr.Q[j + 1]));
        I1[j] = e * I1[j + 1] + 0.5 * h * (Gpair[j][0] + e * Gpair[j + 1][0]);
    }
    // forward sweep for z2 with the mirrored kernel
    I2[0] = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const cplx e = std::exp(-d.rho * (pr.Q[j + 1] - pr.Q[j]));
        I2[j + 1] = e * (I2[j] + 0.5 * h * Gpair[j][1]) + 0.5 * h * Gpair[j + 1][1];
    }

    const cplx z1_end = I1[0] / sol.den1;
    const cplx z2_end = I2[n - 1] / sol.den2;

    sol.z1.resize(n);
    sol.z2.resize(n);
    sol.w.resize(n);
    sol.u_hat.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        sol.z1[j] = std::exp(d.rho * pr.Qt[j]) * z1_end - I1[j];
        sol.z2[j] = std::exp(-d.rho * pr.Q[j]) * sol.boundary * z2_end + I2[j];
        const cplx outer =
            std::exp(d.sigma * P.p0 * pr.node(static_cast<int>(j)) + pr.S[j]);
        const cplx w1 = d.T_mat[0] * sol.z1[j] + d.T_mat[1] * sol.z2[j];
        const cplx w2 = d.T_mat[2] * sol.z1[j] + d.T_mat[3] * sol.z2[j];
        sol.w[j] = {outer * w1, outer * w2};
        sol.u_hat[j] = sol.w[j][0];
    }
    return sol;
}

/// Independent check: classical RK4 on w' = M(t)w + F(t) with M assembled
/// from the display form.  Steps span two grid cells, the odd nodes serve
/// as midpoints; returns samples at the even nodes (T/2 + 1 values).
inline std::vector<std::array<cplx, 2>> integrate_mode_rk(
    const VekuaTimeOp& P, const RepPoint& rep, const EntryIndex& row,
    const EntryIndex& col, const std::vector<std::array<cplx, 2>>& Fpair,
    std::array<cplx, 2> w_init) {
    check_entry(P.D.group, rep, col);
    const TimeProfiles& pr = P.profiles;
    const int T = pr.grid;
    const std::size_t n = static_cast<std::size_t>(T) + 1;
    if (Fpair.size() != n)
        throw ConfigError("Fpair must be sampled on the closed grid (T+1 values)");

    const ModeDiag d = mode_diagonalize(P, rep, row);
    const cplx diag0 = d.sigma * P.p0;

    auto rhs = [&](std::size_t node, const std::array<cplx, 2>& w) {
        const cplx a = diag0 + pr.s[node] + pr.q[node] * d.Mtilde[0];
        const cplx b = pr.q[node] * d.Mtilde[1];
        const cplx c = pr.q[node] * d.Mtilde[2];
        const cplx e = diag0 + pr.s[node] + pr.q[node] * d.Mtilde[3];
        return std::array<cplx, 2>{a * w[0] + b * w[1] + Fpair[node][0],
                                   c * w[0] + e * w[1] + Fpair[node][1]};
    };

    const double h = pr.step();
    std::vector<std::array<cplx, 2>> out(static_cast<std::size_t>(T / 2) + 1);
    out[0] = w_init;
    std::array<cplx, 2> w = w_init;
    for (int j = 0; j + 2 <= T; j += 2) {
        const std::size_t j0 = static_cast<std::size_t>(j);
        const auto k1 = rhs(j0, w);
        const auto k2 = rhs(j0 + 1, {w[0] + h * k1[0], w[1] + h * k1[1]});
        const auto k3 = rhs(j0 + 1, {w[0] + h * k2[0], w[1] + h * k2[1]});
        const auto k4 = rhs(j0 + 2, {w[0] + 2.0 * h * k3[0], w[1] + 2.0 * h * k3[1]});
        for (int c = 0; c < 2; ++c)
            w[static_cast<std::size_t>(c)] +=
                (h / 3.0) * (k1[static_cast<std::size_t>(c)] +
                             2.0 * k2[static_cast<std::size_t>(c)] +
                             2.0 * k3[static_cast<std::size_t>(c)] +
                             k4[static_cast<std::size_t>(c)]);
        out[static_cast<std::size_t>(j / 2) + 1] = w;
    }
    return out;
}

struct ModeResidual {
    std::string mode;
    double residual = 0.0;
    double f_norm = 0.0;
    cplx rho{0.0, 0.0};
    double den1_abs = 0.0, den2_abs = 0.0;
};

struct SolveDiagnostics {
    std::vector<ModeResidual> residuals;
    double max_residual = 0.0;
    std::string worst_mode;
    PowerLawFit decay_fit; // decay of sup_t |u_hat| against weight
    bool decay_fit_ok = false;
};

namespace detail {

/// inf norm of w' - Mw - F with the derivative by centered differences
/// (second-order one-sided stencils at the endpoints).
inline double mode_ode_residual(const VekuaTimeOp& P, const ModeDiag& d,
                                const std::vector<std::array<cplx, 2>>& w,
                                const std::vector<std::array<cplx, 2>>& Fpair) {
    const TimeProfiles& pr = P.profiles;
    const std::size_t n = w.size();
    const double h = pr.step();
    const cplx diag0 = d.sigma * P.p0;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        std::array<cplx, 2> dw;
        for (std::size_t c = 0; c < 2; ++c) {
            if (j == 0)
                dw[c] = (-3.0 * w[0][c] + 4.0 * w[1][c] - w[2][c]) / (2.0 * h);
            else if (j == n - 1)
                dw[c] = (3.0 * w[j][c] - 4.0 * w[j - 1][c] + w[j - 2][c]) / (2.0 * h);
            else
                dw[c] = (w[j + 1][c] - w[j - 1][c]) / (2.0 * h);
        }
        const cplx a = diag0 + pr.s[j] + pr.q[j] * d.Mtilde[0];
        const cplx b = pr.q[j] * d.Mtilde[1];
        const cplx cc = pr.q[j] * d.Mtilde[2];
        const cplx e = diag0 + pr.s[j] + pr.q[j] * d.Mtilde[3];
        const cplx r0 = dw[0] - (a * w[j][0] + b * w[j][1]) - Fpair[j][0];
        const cplx r1 = dw[1] - (cc * w[j][0] + e * w[j][1]) - Fpair[j][1];
        worst = std::max({worst, std::abs(r0), std::abs(r1)});
    }
    return worst;
}

} // namespace detail

/// Mode-by-mode solve of Pu = f over the conjugation-closed support of f.
/// Hypothesis a), per-mode b), and the (DCn) denominators are verified
/// first; all failing modes are collected into one error.
inline TimeCoefficientField solve_timedep(const VekuaTimeOp& P,
                                          const TimeCoefficientField& f, double cutoff,
                                          SolveDiagnostics* diag = nullptr) {
    const GroupSpec& g = P.D.group;
    if (!(g == f.group)) throw ConfigError("operator and field live on different groups");
    const TimeProfiles& pr = P.profiles;
    if (f.grid != pr.grid) throw ConfigError("field grid does not match the profiles");
    const int T = pr.grid;
    const std::size_t n = static_cast<std::size_t>(T) + 1;

    const double aa = std::abs(P.alpha);
    if (std::abs(std::abs(P.delta) - aa) <= 1e-12 * (1.0 + aa))
        throw HypothesisError("hypothesis a) violated: |delta| = |alpha|");

    struct Job {
        RepPoint rep;
        EntryIndex row, col;
        PairInfo pair;
        std::vector<std::array<cplx, 2>> Fpair;
    };
    std::vector<Job> jobs;
    auto job_seen = [&](const RepPoint& r, const EntryIndex& row, const EntryIndex& col) {
        for (const Job& jb : jobs)
            if (jb.rep == r && jb.row == row && jb.col == col) return true;
        return false;
    };

    const std::vector<cplx> zeros(n, cplx{0.0, 0.0});
    auto samples_of = [&](const RepPoint& r, const EntryIndex& row,
                          const EntryIndex& col) -> const std::vector<cplx>& {
        const std::vector<cplx>* s = f.entry(r, row, col);
        return s ? *s : zeros;
    };

    for (const TimeRecord& rec : f.records) {
        if (rec.rep.weight > cutoff * (1.0 + 1e-12)) continue;
        for (const TimeEntry& te : rec.entries) {
            // canonicalize each conjugate pair to one job
            RepPoint r = rec.rep;
            EntryIndex row = te.row, col = te.col;
            PairInfo pi = pair_info(g, r, row, col);
            if (!pi.self_paired) {
                const bool canonical =
                    RepOrder{}(r, pi.partner_rep) ||
                    (r == pi.partner_rep &&
                     flat_of_entry(g, r, row) * r.dim + flat_of_entry(g, r, col) <
                         flat_of_entry(g, r, pi.partner_row) * r.dim +
                             flat_of_entry(g, r, pi.partner_col));
                if (!canonical) {
                    r = pi.partner_rep;
                    row = pi.partner_row;
                    col = pi.partner_col;
                    pi = pair_info(g, r, row, col);
                }
            }
            if (job_seen(r, row, col)) continue;
            Job jb;
            jb.rep = r;
            jb.row = row;
            jb.col = col;
            jb.pair = pi;
            jb.Fpair.resize(n);
            const std::vector<cplx>& f1 = samples_of(r, row, col);
            const std::vector<cplx>& f2 =
                samples_of(pi.partner_rep, pi.partner_row, pi.partner_col);
            for (std::size_t j = 0; j < n; ++j)
                jb.Fpair[j] = {f1[j], pi.phase * std::conj(f2[j])};
            jobs.push_back(std::move(jb));
        }
    }

    // precheck b) and (DCn) over all jobs, collecting every offender
    std::vector<std::string> failing;
    for (const Job& jb : jobs) {
        try {
            const ModeDiag d = mode_diagonalize(P, jb.rep, jb.row);
            const cplx boundary = std::exp(d.sigma * P.p0 * two_pi + pr.s0);
            const cplx decay = std::exp(-d.rho * pr.q0);
            const double scale = std::max(1.0, std::abs(boundary));
            if (std::abs(decay - boundary) <= 1e-12 * scale ||
                std::abs(1.0 - boundary / std::exp(d.rho * pr.q0)) <= 1e-12 * scale)
                failing.push_back("condition (DCn) violated at mode " +
                                  mode_label(jb.rep, jb.row, jb.col));
        } catch (const HypothesisError& e) {
            failing.push_back(e.what());
        }
    }
    if (!failing.empty())
        throw HypothesisError("time-dependent solve aborted", std::move(failing));

    TimeCoefficientField u = zero_time_field(g, T);
    // create all output slots before the parallel fill
    std::vector<std::vector<cplx>*> out_mode(jobs.size()), out_partner(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& jb = jobs[i];
        out_mode[i] = &u.entry_mut(jb.rep, jb.row, jb.col);
        out_partner[i] = jb.pair.self_paired
                             ? nullptr
                             : &u.entry_mut(jb.pair.partner_rep, jb.pair.partner_row,
                                            jb.pair.partner_col);
    }

    std::vector<ModeResidual> residuals(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& jb = jobs[i];
        const ModeDiag d = mode_diagonalize(P, jb.rep, jb.row);
        std::vector<std::array<cplx, 2>> Gpair(n);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx damp = std::exp(-(d.sigma * P.p0 * pr.node(static_cast<int>(j)) +
                                         pr.S[j]));
            const cplx g1 = d.T_inv[0] * jb.Fpair[j][0] + d.T_inv[1] * jb.Fpair[j][1];
            const cplx g2 = d.T_inv[2] * jb.Fpair[j][0] + d.T_inv[3] * jb.Fpair[j][1];
            Gpair[j] = {damp * g1, damp * g2};
        }
        const ModeClosedSolution sol =
            solve_mode_closed(P, jb.rep, jb.row, jb.col, Gpair);
        for (std::size_t j = 0; j < n; ++j) {
            (*out_mode[i])[j] = sol.u_hat[j];
            if (out_partner[i])
                (*out_partner[i])[j] = jb.pair.phase * std::conj(sol.w[j][1]);
        }
        double fn = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            fn = std::max({fn, std::abs(jb.Fpair[j][0]), std::abs(jb.Fpair[j][1])});
        residuals[i] = ModeResidual{mode_label(jb.rep, jb.row, jb.col),
                                    detail::mode_ode_residual(P, d, sol.w, jb.Fpair), fn,
                                    sol.rho, std::abs(sol.den1), std::abs(sol.den2)};
    });

    if (diag) {
        diag->residuals = std::move(residuals);
        diag->max_residual = 0.0;
        for (const ModeResidual& r : diag->residuals) {
            const double rel = r.residual / (1.0 + r.f_norm);
            if (rel > diag->max_residual) {
                diag->max_residual = rel;
                diag->worst_mode = r.mode;
            }
        }
        const auto [w, v] = time_field_magnitudes(u);
        try {
            diag->decay_fit = fit_shell_extrema(w, v, /*reduce_max=*/true, FitMode::decay);
            diag->decay_fit_ok = true;
        } catch (const ConfigError&) {
            diag->decay_fit_ok = false;
        }
    }
    return u;
}

} // namespace vekua
