#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "vekua/constvekua.hpp"

using namespace vekua;

namespace {

GroupSpec circle() { return make_group({Factor::circle}); }
GroupSpec sphere() { return make_group({Factor::sphere3}); }

// constant real tabulated symbol on the circle, k in [-range, range]
DiagonalSymbol const_circle_symbol(double value, int range) {
    const GroupSpec g = circle();
    SymbolTable t;
    for (int k = -range; k <= range; ++k)
        t.put(make_rep(g, {k}), {cplx(value, 0.0)});
    return make_table_symbol(g, t, 0);
}

EntryIndex sphere_entry(int tm) {
    EntryIndex e;
    e.twice_m = {tm};
    return e;
}

// Pu = Lu - qu - p*conj(u) with L = 2*d0^2, q = p = 1 (dense zero set)
VekuaConstOp example_sphere_op() {
    return make_vekua_const(make_symbol(sphere(), "2*d0^2"), {1.0, 0.0}, {1.0, 0.0});
}

// L = d0 + i*Dt on sphere3 x circle, q = i|p| (zeros exactly at k=0, m=0)
VekuaConstOp example_mixed_op() {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    return make_vekua_const(make_symbol(g, "d0@0 + 1i*Dt@1"), {1.0, 0.0}, {0.0, 1.0});
}

} // namespace

TEST_CASE("operator construction requires p != 0", "[constvekua]") {
    REQUIRE_THROWS_WITH(
        make_vekua_const(make_symbol(circle(), "Dt"), {0.0, 0.0}, {1.0, 0.0}),
        Catch::Matchers::ContainsSubstring("p != 0"));
}

TEST_CASE("mode system is assembled structurally", "[constvekua]") {
    const EntryIndex none; // circle reps carry no sphere entries

    // constant symbol 2: both diagonal slots see sigma = 2
    const VekuaConstOp c2 =
        make_vekua_const(const_circle_symbol(2.0, 4), {1.0, 0.0}, {0.0, 0.0});
    const ModeSystem2x2 sys2 = build_mode_system(c2, make_rep(circle(), {2}), none, none);
    REQUIRE(sys2.a11 == cplx(2.0, 0.0));
    REQUIRE(sys2.a12 == cplx(-1.0, 0.0));
    REQUIRE(sys2.a21 == cplx(-1.0, 0.0));
    REQUIRE(sys2.a22 == cplx(2.0, 0.0));
    REQUIRE(sys2.det == cplx(3.0, 0.0));

    // L = Dt: the partner slot contributes conj(sigma(-k)) = -k, not +k
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    const ModeSystem2x2 sysd = build_mode_system(dt, make_rep(circle(), {2}), none, none);
    REQUIRE(sysd.sigma == cplx(2.0, 0.0));
    REQUIRE(sysd.sigma_tilde == cplx(-2.0, 0.0));
    REQUIRE(sysd.det == cplx(-4.25, 0.0));

    // sigma = 0 forces det = -|p|^2
    const VekuaConstOp z =
        make_vekua_const(make_symbol(circle(), "0"), {1.0, 0.0}, {0.0, 0.0});
    REQUIRE(build_mode_system(z, make_rep(circle(), {3}), none, none).det ==
            cplx(-1.0, 0.0));

    // 2*d0^2 with q = p = 1 vanishes at m = 1
    const ModeSystem2x2 s1 = build_mode_system(example_sphere_op(),
                                               make_rep(sphere(), {2}),
                                               sphere_entry(2), sphere_entry(2));
    REQUIRE(std::abs(s1.det) < 1e-15);
}

TEST_CASE("discriminant modulus is conjugation-symmetric", "[constvekua]") {
    const VekuaConstOp P = example_mixed_op();
    for (const RepPoint& r : enumerate_reps(P.L.group, 4.0)) {
        for (const EntryIndex& row : rep_entries(P.L.group, r)) {
            const PairInfo pi = pair_info(P.L.group, r, row, row);
            const double here = std::abs(discriminant(P, r, row));
            const double there = std::abs(discriminant(P, pi.partner_rep, pi.partner_row));
            REQUIRE(here == there); // exact: the partner system is the conjugate
        }
    }
}

TEST_CASE("discriminant is invariant under joint phase rotation", "[constvekua]") {
    const EntryIndex none;
    const cplx phase = std::polar(1.0, 0.7);
    const VekuaConstOp base =
        make_vekua_const(make_symbol(circle(), "1i*Dt"), {0.4, 0.3}, {0.2, -0.5});
    const VekuaConstOp rotated =
        make_vekua_const(base.L.scaled(phase), phase * base.p, phase * base.q);
    for (int k = -6; k <= 6; ++k) {
        const double a = std::abs(discriminant(base, make_rep(circle(), {k}), none));
        const double b = std::abs(discriminant(rotated, make_rep(circle(), {k}), none));
        REQUIRE(std::abs(a - b) < 1e-12 * (1.0 + a));
    }
}

TEST_CASE("cramer solve matches hand values and satisfies the system", "[constvekua]") {
    const EntryIndex none;
    const VekuaConstOp c2 =
        make_vekua_const(const_circle_symbol(2.0, 4), {1.0, 0.0}, {0.0, 0.0});
    const RepPoint k2 = make_rep(circle(), {2});

    const ModeSolution sol = cramer_solve_mode(c2, k2, none, none, {cplx(1.0, 0.0), cplx(0.0, 0.0)});
    REQUIRE(std::abs(sol.at_mode - cplx(2.0 / 3.0, 0.0)) < 1e-15);
    REQUIRE(std::abs(sol.at_partner - cplx(1.0 / 3.0, 0.0)) < 1e-15);
    REQUIRE_FALSE(sol.singular);

    const ModeSolution zero = cramer_solve_mode(c2, k2, none, none, {cplx(0.0, 0.0), cplx(0.0, 0.0)});
    REQUIRE(zero.at_mode == cplx(0.0, 0.0));
    REQUIRE(zero.at_partner == cplx(0.0, 0.0));

    // random data: the assembled equations hold to machine precision
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const VekuaConstOp P = example_mixed_op();
    for (const RepPoint& r : enumerate_reps(P.L.group, 3.0)) {
        const auto entries = rep_entries(P.L.group, r);
        for (const EntryIndex& row : entries) {
            const ModeSystem2x2 sys = build_mode_system(P, r, row, entries[0]);
            if (std::abs(sys.det) <= singular_tol(P, r)) continue;
            const cplx f1(coef(rng), coef(rng));
            // a self-paired slot carries one coefficient, not two
            const cplx f2 = sys.pair.self_paired ? f1 : cplx(coef(rng), coef(rng));
            const ModeSolution s = cramer_solve_mode(P, r, row, entries[0], {f1, f2});
            const cplx w = sys.pair.phase * std::conj(s.at_partner);
            const cplx r1 = sys.a11 * s.at_mode + sys.a12 * w - f1;
            const cplx r2 = sys.a21 * s.at_mode + sys.a22 * w -
                            sys.pair.phase * std::conj(f2);
            REQUIRE(std::abs(r1) < 1e-12 * (1.0 + std::abs(f1)));
            REQUIRE(std::abs(r2) < 1e-12 * (1.0 + std::abs(f2)));
        }
    }
}

TEST_CASE("singular modes follow the selected-solution branch", "[constvekua]") {
    const VekuaConstOp P = example_sphere_op();
    const RepPoint l1 = make_rep(sphere(), {2});
    const EntryIndex m1 = sphere_entry(2), m0 = sphere_entry(0);

    // zero data through the singular branch
    const ModeSolution z = cramer_solve_mode(P, l1, m1, m1, {cplx(0.0, 0.0), cplx(0.0, 0.0)});
    REQUIRE(z.singular);
    REQUIRE(z.at_mode == cplx(0.0, 0.0));
    REQUIRE(z.at_partner == cplx(0.0, 0.0));

    // admissible pair: f2 = -conj(f1) here; u vanishes at the mode
    const ModeSolution s = cramer_solve_mode(P, l1, m1, m1, {cplx(1.0, 0.0), cplx(-1.0, 0.0)});
    REQUIRE(s.singular);
    REQUIRE(s.at_mode == cplx(0.0, 0.0));
    REQUIRE(std::abs(s.at_partner - cplx(-1.0, 0.0)) < 1e-15);

    // inadmissible pair names the mode
    try {
        cramer_solve_mode(P, l1, m1, m1, {cplx(1.0, 0.0), cplx(0.0, 0.0)});
        FAIL("expected AdmissibilityError");
    } catch (const AdmissibilityError& e) {
        REQUIRE_THAT(e.what(),
                     Catch::Matchers::ContainsSubstring("inadmissible at singular mode"));
        REQUIRE(e.modes == std::vector<std::string>{"(2)[2][2]"});
    }

    // self-paired singular mode: minimal-norm real-linear solve
    const ModeSolution sp = cramer_solve_mode(P, l1, m0, m0, {cplx(2.0, 0.0), cplx(2.0, 0.0)});
    REQUIRE(sp.singular);
    REQUIRE(std::abs(sp.at_mode - cplx(-1.0, 0.0)) < 1e-15);
    REQUIRE(sp.at_partner == sp.at_mode);
}

TEST_CASE("apply_vekua matches the entrywise formula", "[constvekua]") {
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    CoefficientField u = zero_field(circle());
    u.set(make_rep(circle(), {1}), 0, 0, cplx(1.0, 0.0));

    const CoefficientField f = apply_vekua(dt, u);
    REQUIRE(std::abs(f.get(make_rep(circle(), {1}), 0, 0) - cplx(1.0, 0.0)) < 1e-15);
    REQUIRE(std::abs(f.get(make_rep(circle(), {-1}), 0, 0) - cplx(-0.5, 0.0)) < 1e-15);

    REQUIRE(sup_norm(apply_vekua(dt, zero_field(circle()))) == 0.0);
}

TEST_CASE("the range of P is admissible", "[constvekua]") {
    const VekuaConstOp P = example_sphere_op(); // plenty of singular modes
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        CoefficientField u = zero_field(sphere());
        for (const RepPoint& r : enumerate_reps(sphere(), 6.0))
            for (int row = 0; row < r.dim; ++row)
                for (int col = 0; col < r.dim; ++col)
                    u.set(r, row, col, cplx(coef(rng), coef(rng)));
        const auto report = is_admissible(P, apply_vekua(P, u), 6.0);
        REQUIRE(report.admissible);
    }

    REQUIRE(is_admissible(P, zero_field(sphere()), 10.0).admissible);

    // a one-sided coefficient at a singular mode violates the relation
    CoefficientField f = zero_field(sphere());
    f.set(make_rep(sphere(), {2}), sphere_entry(2), sphere_entry(2), cplx(1.0, 0.0));
    const auto bad = is_admissible(P, f, 5.0);
    REQUIRE_FALSE(bad.admissible);
    REQUIRE_FALSE(bad.violations.empty());
}

TEST_CASE("solve_const round-trips through apply_vekua", "[constvekua]") {
    std::mt19937 rng(67);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);

    // no singular modes: the solution is unique, so u comes back exactly
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    CoefficientField u0 = zero_field(circle());
    for (int k = -8; k <= 8; ++k)
        u0.set(make_rep(circle(), {k}), 0, 0, cplx(coef(rng), coef(rng)));
    const CoefficientField back = solve_const(dt, apply_vekua(dt, u0), 9.0);
    for (int k = -8; k <= 8; ++k)
        REQUIRE(std::abs(back.get(make_rep(circle(), {k}), 0, 0) -
                         u0.get(make_rep(circle(), {k}), 0, 0)) < 1e-10);

    // singular modes present: the round-trip residual still vanishes
    const VekuaConstOp P = example_mixed_op();
    CoefficientField v0 = zero_field(P.L.group);
    for (const RepPoint& r : enumerate_reps(P.L.group, 4.0))
        for (int row = 0; row < r.dim; ++row)
            for (int col = 0; col < r.dim; ++col)
                v0.set(r, row, col, cplx(coef(rng), coef(rng)));
    const CoefficientField f = apply_vekua(P, v0);
    const CoefficientField v = solve_const(P, f, 4.0);
    const CoefficientField pv = apply_vekua(P, v);
    double resid = 0.0;
    for (const RepPoint& r : f.reps)
        for (int row = 0; row < r.dim; ++row)
            for (int col = 0; col < r.dim; ++col)
                resid = std::max(resid,
                                 std::abs(pv.get(r, row, col) - f.get(r, row, col)));
    REQUIRE(resid <= 1e-10 * (1.0 + sup_norm(f)));

    REQUIRE(sup_norm(solve_const(P, zero_field(P.L.group), 5.0)) == 0.0);

    // inadmissible data is rejected with the offending modes
    const VekuaConstOp S = example_sphere_op();
    CoefficientField badf = zero_field(sphere());
    badf.set(make_rep(sphere(), {2}), sphere_entry(2), sphere_entry(2), cplx(1.0, 0.0));
    try {
        solve_const(S, badf, 5.0);
        FAIL("expected AdmissibilityError");
    } catch (const AdmissibilityError& e) {
        REQUIRE_THAT(e.what(),
                     Catch::Matchers::ContainsSubstring("not admissible"));
        REQUIRE_FALSE(e.modes.empty());
    }
}

TEST_CASE("diophantine scan on the torus shift family", "[constvekua]") {
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    const DiophantineReport rep = scan_diophantine(dt, 50.0);
    REQUIRE(rep.zeros.empty());
    REQUIRE(std::abs(rep.min_abs_nonzero - 0.25) < 1e-15);
    REQUIRE(rep.verdict_gh == GhVerdict::GH_plausible);
    REQUIRE(rep.verdict_gs == GsVerdict::GS_plausible);
    REQUIRE(rep.caveat == "truncation-limited");

    // a fixed absolute tolerance reclassifies the k = 0 mode
    const DiophantineReport loose = scan_diophantine(dt, 50.0, 0.3);
    REQUIRE(loose.zeros.size() == 1);
    REQUIRE(loose.zeros[0].rep.idx == std::vector<int>{0});
}

TEST_CASE("diophantine scan flags dense zero sets", "[constvekua]") {
    const DiophantineReport rep = scan_diophantine(example_sphere_op(), 30.0);
    REQUIRE_FALSE(rep.zeros.empty());
    REQUIRE(rep.verdict_gh == GhVerdict::GH_fail_zero_set_infinite);
    // zeros sit at m in {0, +-1} on integer-spin reps only
    for (const ZeroMode& z : rep.zeros) {
        REQUIRE(z.rep.idx[0] % 2 == 0);
        REQUIRE(std::abs(z.row.twice_m[0]) <= 2);
    }
}

TEST_CASE("diophantine scan isolates the mixed example's zero line", "[constvekua]") {
    const DiophantineReport rep = scan_diophantine(example_mixed_op(), 10.0);
    REQUIRE_FALSE(rep.zeros.empty());
    for (const ZeroMode& z : rep.zeros) {
        REQUIRE(z.rep.idx[1] == 0);          // k = 0
        REQUIRE(z.rep.idx[0] % 2 == 0);      // integer spin
        REQUIRE(z.row.twice_m[0] == 0);      // m = 0
    }
    REQUIRE(std::abs(rep.min_abs_nonzero - 1.0) < 1e-12);
}

TEST_CASE("rapidly decaying discriminants trigger the GS_fail verdict", "[constvekua]") {
    const GroupSpec g = circle();
    SymbolTable t;
    for (int k = -12; k <= 12; ++k) {
        const cplx v = (k == 0) ? cplx(2.0, 0.0)
                                : cplx(0.0, (k > 0 ? 1.0 : -1.0) * std::pow(4.0, -std::abs(k)));
        t.put(make_rep(g, {k}), {v});
    }
    const VekuaConstOp P =
        make_vekua_const(make_table_symbol(g, t, 0), {0.5, 0.0}, {0.5, 0.0});
    REQUIRE(check_diagonal_compat(P.L, 12.0).compat);

    const DiophantineReport rep = scan_diophantine(P, 12.0);
    REQUIRE(rep.zeros.empty());
    REQUIRE(rep.verdict_gs == GsVerdict::GS_fail);
    REQUIRE(rep.dcprime_fit.exponent < -8.0);
}

TEST_CASE("gh_zero witnesses solve the homogeneous equation", "[constvekua]") {
    const VekuaConstOp P = example_sphere_op();
    std::vector<ModeRef> modes;
    for (int tl = 2; tl <= 10; tl += 2)
        modes.push_back({make_rep(sphere(), {tl}), sphere_entry(2), sphere_entry(2)});

    const WitnessBundle w = make_witness(P, WitnessKind::gh_zero, modes);
    REQUIRE(w.skipped.empty());
    REQUIRE(sup_norm(apply_vekua(P, w.u)) < 1e-12);

    // hand values at l = 1: u(m=1) = sigma_tilde - conj q = 1, partner = p = 1
    REQUIRE(w.u.get(make_rep(sphere(), {2}), sphere_entry(2), sphere_entry(2)) ==
            cplx(1.0, 0.0));
    REQUIRE(w.u.get(make_rep(sphere(), {2}), sphere_entry(-2), sphere_entry(-2)) ==
            cplx(1.0, 0.0));

    // coefficients do not decay
    const auto [mw, mv] = field_magnitudes(w.u);
    const PowerLawFit fit = fit_power_law(mw, mv, FitMode::decay);
    REQUIRE(fit.exponent >= -0.01);

    // a nonsingular mode is skipped with a reason
    const WitnessBundle s =
        make_witness(P, WitnessKind::gh_zero,
                     {{make_rep(sphere(), {1}), sphere_entry(1), sphere_entry(1)}});
    REQUIRE(s.skipped.size() == 1);
    REQUIRE_THAT(s.skipped[0], Catch::Matchers::ContainsSubstring("det is nonzero"));

    // a mode passed twice (directly and via its partner) is taken once
    const WitnessBundle d =
        make_witness(P, WitnessKind::gh_zero,
                     {{make_rep(sphere(), {2}), sphere_entry(2), sphere_entry(2)},
                      {make_rep(sphere(), {2}), sphere_entry(-2), sphere_entry(-2)}});
    REQUIRE(d.skipped.size() == 1);
    REQUIRE_THAT(d.skipped[0], Catch::Matchers::ContainsSubstring("covered by its partner"));

    // self-paired zero mode: |u| = |p| and Pu = 0 still
    const WitnessBundle sp =
        make_witness(P, WitnessKind::gh_zero,
                     {{make_rep(sphere(), {4}), sphere_entry(0), sphere_entry(0)}});
    REQUIRE(sp.skipped.empty());
    REQUIRE(std::abs(std::abs(sp.u.get(make_rep(sphere(), {4}), sphere_entry(0),
                                       sphere_entry(0))) -
                     std::abs(P.p)) < 1e-14);
    REQUIRE(sup_norm(apply_vekua(P, sp.u)) < 1e-12);
}

TEST_CASE("gh_necessity witnesses satisfy Pu = f with f = c*det", "[constvekua]") {
    const EntryIndex none;
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    std::vector<ModeRef> modes;
    for (int k = 1; k <= 6; ++k) modes.push_back({make_rep(circle(), {k}), none, none});

    const cplx c{0.7, -0.2};
    const WitnessBundle w = make_witness(dt, WitnessKind::gh_necessity, modes, c);
    REQUIRE(w.skipped.empty());

    for (int k = 1; k <= 6; ++k) {
        const cplx det = discriminant(dt, make_rep(circle(), {k}), none);
        REQUIRE(std::abs(w.f.get(make_rep(circle(), {k}), 0, 0) - c * det) < 1e-13);
    }
    const CoefficientField pu = apply_vekua(dt, w.u);
    double resid = 0.0;
    for (const RepPoint& r : w.f.reps)
        resid = std::max(resid, std::abs(pu.get(r, 0, 0) - w.f.get(r, 0, 0)));
    REQUIRE(resid < 1e-12 * (1.0 + sup_norm(w.f)));

    REQUIRE_THROWS_WITH(make_witness(dt, WitnessKind::gh_necessity, modes, {0.0, 0.0}),
                        Catch::Matchers::ContainsSubstring("c != 0"));
}

TEST_CASE("gs_fail witnesses force the reciprocal growth", "[constvekua]") {
    const EntryIndex none;
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    std::vector<ModeRef> modes;
    for (int k = 1; k <= 5; ++k) modes.push_back({make_rep(circle(), {k}), none, none});

    const WitnessBundle w = make_witness(dt, WitnessKind::gs_fail, modes);
    REQUIRE(w.skipped.empty());
    REQUIRE(w.growth_table.size() == 5);
    REQUIRE(is_admissible(dt, w.f, 6.0).admissible);

    const CoefficientField u = solve_const(dt, w.f, 6.0);
    for (const GrowthRow& row : w.growth_table) {
        const cplx det = discriminant(dt, row.rep, row.row);
        const cplx got = u.get(row.rep, row.row, row.col);
        REQUIRE(std::abs(got - 1.0 / det) < 1e-13 * row.reciprocal);
        REQUIRE(std::abs(row.reciprocal - 1.0 / std::abs(det)) < 1e-15);
    }

    // self-paired modes admit no one-sided source and are skipped
    const VekuaConstOp S =
        make_vekua_const(make_symbol(sphere(), "2*d0^2"), {1.0, 0.0}, {0.0, 0.0});
    const WitnessBundle sp =
        make_witness(S, WitnessKind::gs_fail,
                     {{make_rep(sphere(), {2}), sphere_entry(0), sphere_entry(0)}});
    REQUIRE(sp.skipped.size() == 1);
    REQUIRE_THAT(sp.skipped[0], Catch::Matchers::ContainsSubstring("self-paired mode"));
}

TEST_CASE("singular tolerance scales with the declared order", "[constvekua]") {
    const VekuaConstOp dt =
        make_vekua_const(make_symbol(circle(), "Dt"), {0.5, 0.0}, {0.0, 0.0});
    REQUIRE(dt.L.declared_order == 1);
    const RepPoint k10 = make_rep(circle(), {10});
    REQUIRE(std::abs(singular_tol(dt, k10) - 1e-12 * k10.weight * k10.weight) < 1e-22);
    const VekuaConstOp c2 =
        make_vekua_const(const_circle_symbol(2.0, 12), {1.0, 0.0}, {0.0, 0.0});
    REQUIRE(singular_tol(c2, k10) == 1e-12);
}
