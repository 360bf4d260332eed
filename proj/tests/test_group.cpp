#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "vekua/group.hpp"

using namespace vekua;

TEST_CASE("circle dual enumeration matches hand counts", "[group]") {
    const GroupSpec g = make_group({Factor::circle});

    const auto few = enumerate_reps(g, 1.0);
    REQUIRE(few.size() == 1);
    REQUIRE(few[0].idx == std::vector<int>{0});
    REQUIRE(few[0].weight == 1.0);

    // <k> = sqrt(1 + k^2): k = +-1 has weight sqrt(2) <= 1.5, k = +-2 does not
    const auto three = enumerate_reps(g, 1.5);
    REQUIRE(three.size() == 3);
    REQUIRE(three[0].idx == std::vector<int>{0});
    REQUIRE(three[1].idx == std::vector<int>{1});
    REQUIRE(three[2].idx == std::vector<int>{-1});

    const auto five = enumerate_reps(g, 3.0);
    REQUIRE(five.size() == 5);
    REQUIRE(five[3].idx == std::vector<int>{2});
    REQUIRE(five[4].idx == std::vector<int>{-2});
}

TEST_CASE("sphere dual enumeration and weights", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3});
    const auto reps = enumerate_reps(g, 2.0);
    REQUIRE(reps.size() == 3); // 2l = 0, 1, 2
    REQUIRE(reps[0].dim == 1);
    REQUIRE(reps[1].dim == 2);
    REQUIRE(reps[2].dim == 3);
    REQUIRE(reps[0].weight == 1.0);
    REQUIRE(std::abs(reps[1].weight - std::sqrt(1.75)) < 1e-15);
    REQUIRE(std::abs(reps[2].weight - std::sqrt(3.0)) < 1e-15);
    // exact integer keys: 4 + 2l(2l + 2)
    REQUIRE(reps[0].weight_key == 4);
    REQUIRE(reps[1].weight_key == 7);
    REQUIRE(reps[2].weight_key == 12);
}

TEST_CASE("enumeration budget has no boundary leak", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    const double cutoff = 5.0;
    const auto reps = enumerate_reps(g, cutoff);
    for (const RepPoint& r : reps) {
        REQUIRE(r.weight <= cutoff * (1.0 + 1e-12));
        REQUIRE(static_cast<double>(r.weight_key) <= 4.0 * cutoff * cutoff + 1e-6);
    }
    // the next shell is genuinely outside
    const auto more = enumerate_reps(g, cutoff + 0.3);
    REQUIRE(more.size() > reps.size());
}

TEST_CASE("rep order is weight-major and deterministic", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    const auto reps = enumerate_reps(g, 4.0);
    REQUIRE(std::is_sorted(reps.begin(), reps.end(), RepOrder{}));
    std::set<std::vector<int>> seen;
    for (const RepPoint& r : reps) REQUIRE(seen.insert(r.idx).second);
    // positive circle frequency sorts before its negative twin
    for (std::size_t i = 0; i + 1 < reps.size(); ++i) {
        if (reps[i].idx[0] == reps[i + 1].idx[0] &&
            reps[i].idx[1] == -reps[i + 1].idx[1] && reps[i].idx[1] != 0)
            REQUIRE(reps[i].idx[1] > 0);
    }
}

TEST_CASE("conjugation on the circle negates the frequency", "[group]") {
    const GroupSpec g = make_group({Factor::circle});
    const RepPoint r = make_rep(g, {3});
    const ConjRule rule = conjugate_rep(g, r);
    REQUIRE(rule.target.idx == std::vector<int>{-3});
    REQUIRE_FALSE(rule.self_dual);
    REQUIRE(rule.phase(EntryIndex{}, EntryIndex{}) == 1.0);

    const ConjRule zero = conjugate_rep(g, make_rep(g, {0}));
    REQUIRE(zero.self_dual);
}

TEST_CASE("conjugation on the sphere is self-dual with entry flip", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3});
    const RepPoint r = make_rep(g, {2}); // l = 1
    const ConjRule rule = conjugate_rep(g, r);
    REQUIRE(rule.self_dual);
    REQUIRE(rule.target == r);

    EntryIndex top;
    top.twice_m = {2};
    EntryIndex mid;
    mid.twice_m = {0};
    REQUIRE(rule.entry_map(top).twice_m == std::vector<int>{-2});
    // (-1)^(m - n) with m = 1, n = 0
    REQUIRE(rule.phase(top, mid) == -1.0);
    REQUIRE(rule.phase(top, top) == 1.0);
    REQUIRE(rule.phase(mid, mid) == 1.0);
}

TEST_CASE("conjugation on products touches only circle slots", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    const RepPoint r = make_rep(g, {1, 2}); // l = 1/2, k = 2
    const ConjRule rule = conjugate_rep(g, r);
    REQUIRE(rule.target.idx == std::vector<int>{1, -2});
    REQUIRE_FALSE(rule.self_dual);

    // conjugation is an involution on the dual
    const ConjRule back = conjugate_rep(g, rule.target);
    REQUIRE(back.target == r);
}

TEST_CASE("enumeration is closed under conjugation", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    const auto reps = enumerate_reps(g, 4.0);
    for (const RepPoint& r : reps) {
        const RepPoint partner = conjugate_rep(g, r).target;
        REQUIRE(std::find(reps.begin(), reps.end(), partner) != reps.end());
        REQUIRE(partner.weight == r.weight);
    }
}

TEST_CASE("entry indexing round-trips and validates", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::sphere3});
    const RepPoint r = make_rep(g, {2, 1}); // dims 3 x 2
    REQUIRE(r.dim == 6);
    for (int flat = 0; flat < r.dim; ++flat) {
        const EntryIndex e = entry_of_flat(g, r, flat);
        REQUIRE(flat_of_entry(g, r, e) == flat);
    }
    EntryIndex bad;
    bad.twice_m = {4, 1}; // |2m| > 2l on the first factor
    REQUIRE_THROWS_AS(check_entry(g, r, bad), ConfigError);
    EntryIndex parity;
    parity.twice_m = {1, 1}; // wrong parity on the first factor
    REQUIRE_THROWS_AS(check_entry(g, r, parity), ConfigError);
}

TEST_CASE("labels are stable", "[group]") {
    const GroupSpec g = make_group({Factor::sphere3, Factor::circle});
    const RepPoint r = make_rep(g, {3, -2});
    REQUIRE(rep_label(r) == "(3,-2)");
    EntryIndex e;
    e.twice_m = {-1};
    REQUIRE(entry_label(e) == "[-1]");
}

TEST_CASE("config errors on malformed specs", "[group]") {
    REQUIRE_THROWS_AS(make_group(std::vector<Factor>{}), ConfigError);
    const GroupSpec g = make_group({Factor::sphere3});
    REQUIRE_THROWS_AS(make_rep(g, {1, 2}), ConfigError);  // index count mismatch
    REQUIRE_THROWS_AS(make_rep(g, {-1}), ConfigError);    // negative sphere index
    REQUIRE_THROWS_AS(enumerate_reps(g, 0.5), ConfigError);
}
