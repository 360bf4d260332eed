#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "vekua/field.hpp"
#include "vekua/powerlaw.hpp"

using namespace vekua;

TEST_CASE("circle conjugation swaps and conjugates coefficients", "[field]") {
    const GroupSpec g = make_group({Factor::circle});
    CoefficientField u = zero_field(g);
    u.set(make_rep(g, {1}), 0, 0, cplx(0.0, 1.0)); // u_hat(1) = i
    u.set(make_rep(g, {-1}), 0, 0, cplx(2.0, 0.0));

    const CoefficientField v = conj_field(u);
    REQUIRE(v.get(make_rep(g, {1}), 0, 0) == cplx(2.0, 0.0));
    REQUIRE(v.get(make_rep(g, {-1}), 0, 0) == cplx(0.0, -1.0));
}

TEST_CASE("sphere conjugation flips entries with the parity phase", "[field]") {
    const GroupSpec g = make_group({Factor::sphere3});
    const RepPoint half = make_rep(g, {1});
    EntryIndex up, down;
    up.twice_m = {1};
    down.twice_m = {-1};

    CoefficientField u = zero_field(g);
    u.set(half, up, up, cplx(1.0, 1.0));

    const CoefficientField v = conj_field(u);
    REQUIRE(v.get(half, down, down) == cplx(1.0, -1.0));
    REQUIRE(v.get(half, up, up) == cplx(0.0, 0.0));

    // an off-diagonal coefficient picks up the sign (-1)^(m - n)
    CoefficientField w = zero_field(g);
    w.set(half, down, up, cplx(3.0, 0.0));
    const CoefficientField cw = conj_field(w);
    REQUIRE(cw.get(half, up, down) == cplx(-3.0, 0.0));
}

TEST_CASE("conjugation is an exact involution", "[field]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);

    CoefficientField u = zero_field(g);
    for (const RepPoint& r : enumerate_reps(g, 3.0))
        for (int row = 0; row < r.dim; ++row)
            for (int col = 0; col < r.dim; ++col)
                u.set(r, row, col, cplx(coef(rng), coef(rng)));

    const CoefficientField uu = conj_field(conj_field(u));
    REQUIRE(uu.reps.size() == u.reps.size());
    for (std::size_t i = 0; i < u.reps.size(); ++i) {
        REQUIRE(uu.reps[i] == u.reps[i]);
        REQUIRE(uu.mats[i] == u.mats[i]); // bit-exact: phases are +-1
    }
    REQUIRE(sup_norm(conj_field(u)) == sup_norm(u));
}

TEST_CASE("storage stays closed under conjugation", "[field]") {
    const GroupSpec g = make_group({Factor::circle});
    CoefficientField u = zero_field(g);
    u.set(make_rep(g, {2}), 0, 0, cplx(1.0, 0.0));
    REQUIRE(u.find(make_rep(g, {-2})) != CoefficientField::npos);
    REQUIRE(u.get(make_rep(g, {-2}), 0, 0) == cplx(0.0, 0.0));
    // unstored reps read as exact zero
    REQUIRE(u.get(make_rep(g, {17}), 0, 0) == cplx(0.0, 0.0));
}

TEST_CASE("field_combine is entrywise linear", "[field]") {
    const GroupSpec g = make_group({Factor::circle});
    const RepPoint k1 = make_rep(g, {1});
    const RepPoint k3 = make_rep(g, {3});

    CoefficientField u = zero_field(g), v = zero_field(g);
    u.set(k1, 0, 0, cplx(1.0, 0.0));
    v.set(k1, 0, 0, cplx(0.0, 1.0));
    v.set(k3, 0, 0, cplx(4.0, 0.0));

    const CoefficientField s = field_combine(cplx(2.0, 0.0), u, cplx(0.0, 1.0), v);
    REQUIRE(s.get(k1, 0, 0) == cplx(1.0, 1.0)); // 2*1 + i*i
    REQUIRE(s.get(k3, 0, 0) == cplx(0.0, 4.0));
    REQUIRE(s.get(make_rep(g, {-3}), 0, 0) == cplx(0.0, 0.0));

    const GroupSpec g2 = make_group({Factor::sphere3});
    REQUIRE_THROWS_AS(field_combine(1.0, u, 1.0, zero_field(g2)), ConfigError);
}

TEST_CASE("row multiplier scales rows only", "[field]") {
    const GroupSpec g = make_group({Factor::sphere3});
    const RepPoint l1 = make_rep(g, {2}); // dim 3
    CoefficientField u = zero_field(g);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) u.set(l1, r, c, cplx(1.0, 0.0));

    const CoefficientField out = apply_row_multiplier(u, [](const RepPoint& rep) {
        std::vector<cplx> rv(static_cast<std::size_t>(rep.dim));
        for (int m = 0; m < rep.dim; ++m) rv[m] = cplx(double(m), 0.0);
        return rv;
    });
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            REQUIRE(out.get(l1, r, c) == cplx(double(r), 0.0));

    REQUIRE_THROWS_AS(apply_row_multiplier(
                          u, [](const RepPoint&) { return std::vector<cplx>{}; }),
                      ConfigError);
}

TEST_CASE("magnitudes pair weights with per-rep sups", "[field]") {
    const GroupSpec g = make_group({Factor::circle});
    CoefficientField u = zero_field(g);
    for (int k = -5; k <= 5; ++k)
        u.set(make_rep(g, {k}), 0, 0,
              cplx(std::pow(1.0 + k * k, -1.0), 0.0)); // <k>^-2
    const auto [w, v] = field_magnitudes(u);
    REQUIRE(w.size() == 11);
    const auto fit = fit_shell_extrema(w, v, true, FitMode::decay);
    REQUIRE(std::abs(fit.exponent + 2.0) < 1e-6);
}

TEST_CASE("time fields validate the grid and store sparse entries", "[field]") {
    const GroupSpec g = make_group({Factor::circle});
    REQUIRE_THROWS_AS(zero_time_field(g, 3), ConfigError);
    REQUIRE_THROWS_AS(zero_time_field(g, 2), ConfigError);

    TimeCoefficientField f = zero_time_field(g, 8);
    REQUIRE(f.entry(make_rep(g, {1}), 0, 0) == nullptr);
    auto& samples = f.entry_mut(make_rep(g, {1}), 0, 0);
    REQUIRE(samples.size() == 9); // closed grid: T + 1 points
    samples[4] = cplx(0.0, 2.0);
    const auto* read = f.entry(make_rep(g, {1}), 0, 0);
    REQUIRE(read != nullptr);
    REQUIRE((*read)[4] == cplx(0.0, 2.0));

    const auto [w, v] = time_field_magnitudes(f);
    REQUIRE(w.size() == 1);
    REQUIRE(v[0] == 2.0);
}
