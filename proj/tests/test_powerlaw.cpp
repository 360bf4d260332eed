#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "vekua/powerlaw.hpp"

using namespace vekua;

namespace {

// <k> = sqrt(1 + k^2) sampled over |k| <= 20, value = <k>^e
void bracket_samples(double e, std::vector<double>& w, std::vector<double>& v) {
    w.clear();
    v.clear();
    for (int k = -20; k <= 20; ++k) {
        const double wk = std::sqrt(1.0 + double(k) * double(k));
        w.push_back(wk);
        v.push_back(std::pow(wk, e));
    }
}

} // namespace

TEST_CASE("exact power laws are recovered", "[powerlaw]") {
    std::vector<double> w, v;

    bracket_samples(-3.0, w, v);
    const auto decay = fit_power_law(w, v, FitMode::decay);
    REQUIRE(std::abs(decay.exponent + 3.0) < 1e-6);
    REQUIRE(std::abs(decay.constant - 1.0) < 1e-6);
    REQUIRE(decay.max_residual < 1e-9);
    REQUIRE(decay.n_zero == 0);

    bracket_samples(0.0, w, v);
    const auto flat = fit_power_law(w, v);
    REQUIRE(std::abs(flat.exponent) < 1e-9);
    REQUIRE(std::abs(flat.constant - 1.0) < 1e-9);

    bracket_samples(2.0, w, v);
    for (double& x : v) x *= 5.0;
    const auto quad = fit_power_law(w, v, FitMode::upper_growth);
    REQUIRE(std::abs(quad.exponent - 2.0) < 1e-6);
    REQUIRE(std::abs(quad.constant - 5.0) < 1e-5);
}

TEST_CASE("exponent sweep recovers integer slopes", "[powerlaw]") {
    std::vector<double> w, v;
    for (int e0 = -6; e0 <= 6; ++e0) {
        bracket_samples(double(e0), w, v);
        const auto fit =
            fit_power_law(w, v, e0 < 0 ? FitMode::decay : FitMode::upper_growth);
        REQUIRE(std::abs(fit.exponent - double(e0)) < 1e-6);
    }
}

TEST_CASE("constant is an upper envelope over every sample", "[powerlaw]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> jitter(0.2, 1.0);
    std::vector<double> w, v;
    for (int k = 1; k <= 40; ++k) {
        const double wk = std::sqrt(1.0 + double(k) * double(k));
        w.push_back(wk);
        v.push_back(jitter(rng) * std::pow(wk, -2.0));
    }
    const auto fit = fit_power_law(w, v, FitMode::decay);
    for (std::size_t i = 0; i < w.size(); ++i)
        REQUIRE(v[i] <= fit.constant * std::pow(w[i], fit.exponent) * (1.0 + 1e-12));
    REQUIRE(fit.max_residual >= 0.0);
}

TEST_CASE("zeros are excluded and counted", "[powerlaw]") {
    std::vector<double> w, v;
    bracket_samples(-1.0, w, v);
    v[0] = 0.0;
    v[5] = 0.0;
    const auto fit = fit_power_law(w, v, FitMode::decay);
    REQUIRE(fit.n_zero == 2);
    REQUIRE_FALSE(fit.identically_zero);
    REQUIRE(std::abs(fit.exponent + 1.0) < 1e-6);
}

TEST_CASE("all-zero data is flagged, not fitted", "[powerlaw]") {
    const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> v{0.0, 0.0, 0.0, 0.0};
    const auto fit = fit_power_law(w, v);
    REQUIRE(fit.identically_zero);
    REQUIRE(fit.n_used == 0);
    REQUIRE(fit.n_zero == 4);
}

TEST_CASE("too few distinct weights throws", "[powerlaw]") {
    const std::vector<double> w{1.0, 2.0, 1.0, 2.0};
    const std::vector<double> v{1.0, 1.0, 1.0, 1.0};
    REQUIRE_THROWS_AS(fit_power_law(w, v), ConfigError);
    REQUIRE_THROWS_WITH(fit_power_law(w, v),
                        Catch::Matchers::ContainsSubstring("3 distinct weights"));
}

TEST_CASE("shell extrema reduce before fitting", "[powerlaw]") {
    // two samples per shell; the max picks the w^2 branch, the min the w^-2 one
    std::vector<double> w, v_hi, v_lo, both_w, both_v;
    for (int k = 1; k <= 15; ++k) {
        const double wk = double(k);
        both_w.push_back(wk);
        both_v.push_back(wk * wk);
        both_w.push_back(wk);
        both_v.push_back(std::pow(wk, -2.0));
    }
    const auto upper = fit_shell_extrema(both_w, both_v, true, FitMode::upper_growth);
    const auto lower = fit_shell_extrema(both_w, both_v, false, FitMode::decay);
    REQUIRE(std::abs(upper.exponent - 2.0) < 1e-6);
    REQUIRE(std::abs(lower.exponent + 2.0) < 1e-6);
}
