#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "vekua/base.hpp"

namespace vekua {

enum class FitMode { upper_growth, decay };

/// Result of fitting value ~ constant * weight^exponent.  The constant is
/// adjusted upward so value <= constant * weight^exponent holds at every
/// sample; max_residual is the largest slack of that bound in log scale.
struct PowerLawFit {
    double constant = 0.0;
    double exponent = 0.0;
    double max_residual = 0.0;
    bool identically_zero = false;
    std::size_t n_used = 0;
    std::size_t n_zero = 0;
};

/// Least-squares fit of log(value) against log(weight).  Zero values are
/// excluded from the log fit and counted in n_zero.  The slope is computed
/// on the outer half of the weight range (w >= w_max / 2) when at least
/// three distinct weights live there, which keeps low-weight transients out
/// of the asymptotic exponent.  The fit mode does not change the arithmetic,
/// only what the caller reads into the exponent.
inline PowerLawFit fit_power_law(const std::vector<double>& weights,
                                 const std::vector<double>& values,
                                 FitMode /*mode*/ = FitMode::upper_growth) {
    PowerLawFit fit;
    const std::size_t n_samples = std::min(weights.size(), values.size());

    std::vector<double> all_w(weights.begin(), weights.begin() + n_samples);
    std::sort(all_w.begin(), all_w.end());
    all_w.erase(std::unique(all_w.begin(), all_w.end()), all_w.end());
    if (all_w.size() < 3)
        throw ConfigError("power-law fit needs at least 3 distinct weights");

    std::vector<std::pair<double, double>> pts; // (w, v) with v > 0
    double w_max = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        if (!(weights[i] > 0.0)) continue;
        if (!(values[i] > 0.0)) {
            ++fit.n_zero;
            continue;
        }
        pts.emplace_back(weights[i], values[i]);
        w_max = std::max(w_max, weights[i]);
    }
    if (pts.empty()) {
        fit.identically_zero = true;
        return fit;
    }

    auto distinct = [](const std::vector<std::pair<double, double>>& p) {
        std::vector<double> w;
        w.reserve(p.size());
        for (const auto& q : p) w.push_back(q.first);
        std::sort(w.begin(), w.end());
        w.erase(std::unique(w.begin(), w.end()), w.end());
        return w.size();
    };

    std::vector<std::pair<double, double>> tail;
    for (const auto& p : pts)
        if (p.first >= 0.5 * w_max) tail.push_back(p);
    const auto& used = (distinct(tail) >= 3) ? tail : pts;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [w, v] : used) {
        const double x = std::log(w), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(used.size());
    const double den = n * sxx - sx * sx;
    fit.exponent = (std::abs(den) > 1e-300) ? (n * sxy - sx * sy) / den : 0.0;
    fit.n_used = used.size();

    double log_c = -std::numeric_limits<double>::infinity();
    for (const auto& [w, v] : pts)
        log_c = std::max(log_c, std::log(v) - fit.exponent * std::log(w));
    fit.constant = std::exp(log_c);
    for (const auto& [w, v] : pts)
        fit.max_residual = std::max(
            fit.max_residual, log_c + fit.exponent * std::log(w) - std::log(v));
    return fit;
}

/// Collapses per-sample data to one value per weight shell before fitting:
/// the shell maximum for an upper envelope, the shell minimum for a lower
/// one (over whatever samples the caller supplies).
inline PowerLawFit fit_shell_extrema(const std::vector<double>& weights,
                                     const std::vector<double>& values,
                                     bool reduce_max,
                                     FitMode mode = FitMode::upper_growth) {
    std::map<double, double> shell;
    const std::size_t n = std::min(weights.size(), values.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, fresh] = shell.emplace(weights[i], values[i]);
        if (!fresh)
            it->second = reduce_max ? std::max(it->second, values[i])
                                    : std::min(it->second, values[i]);
    }
    std::vector<double> w, v;
    w.reserve(shell.size());
    v.reserve(shell.size());
    for (const auto& [wi, vi] : shell) {
        w.push_back(wi);
        v.push_back(vi);
    }
    return fit_power_law(w, v, mode);
}

} // namespace vekua
