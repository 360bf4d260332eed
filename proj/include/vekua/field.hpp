#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "vekua/base.hpp"
#include "vekua/group.hpp"

namespace vekua {

/// Finitely supported map RepPoint -> d x d complex matrix.  Unstored reps
/// are exactly zero.  Support stays conjugation-closed: storing a rep forces
/// storage (possibly zero) of its conjugate.
struct CoefficientField {
    GroupSpec group;
    std::vector<RepPoint> reps;          // sorted by RepOrder
    std::vector<std::vector<cplx>> mats; // aligned with reps, row-major d x d

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t find(const RepPoint& r) const {
        const auto it = std::lower_bound(reps.begin(), reps.end(), r, RepOrder{});
        if (it == reps.end() || !(*it == r)) return npos;
        return static_cast<std::size_t>(it - reps.begin());
    }

    /// Index of r, inserting a zero matrix for r and its conjugate if absent.
    std::size_t ensure(const RepPoint& r) {
        std::size_t i = insert_zero(r);
        const RepPoint partner = conjugate_rep(group, r).target;
        if (!(partner == r)) {
            insert_zero(partner);
            i = find(r);
        }
        return i;
    }

    cplx get(const RepPoint& r, int row, int col) const {
        const std::size_t i = find(r);
        if (i == npos) return {0.0, 0.0};
        return mats[i][static_cast<std::size_t>(row) * r.dim + col];
    }

    void set(const RepPoint& r, int row, int col, cplx v) {
        const std::size_t i = ensure(r);
        mats[i][static_cast<std::size_t>(row) * r.dim + col] = v;
    }

    cplx get(const RepPoint& r, const EntryIndex& row, const EntryIndex& col) const {
        return get(r, flat_of_entry(group, r, row), flat_of_entry(group, r, col));
    }

    void set(const RepPoint& r, const EntryIndex& row, const EntryIndex& col, cplx v) {
        set(r, flat_of_entry(group, r, row), flat_of_entry(group, r, col), v);
    }

private:
    std::size_t insert_zero(const RepPoint& r) {
        const auto it = std::lower_bound(reps.begin(), reps.end(), r, RepOrder{});
        const std::size_t i = static_cast<std::size_t>(it - reps.begin());
        if (it != reps.end() && *it == r) return i;
        reps.insert(it, r);
        mats.insert(mats.begin() + i,
                    std::vector<cplx>(static_cast<std::size_t>(r.dim) * r.dim));
        return i;
    }
};

inline CoefficientField zero_field(const GroupSpec& g) {
    if (g.factors.empty()) throw ConfigError("group spec has no factors");
    return CoefficientField{g, {}, {}};
}

/// Coefficients of conj(u): v(xi)_{RC} = phase(R,C) * conj(u(conj xi)_{-R,-C}).
inline CoefficientField conj_field(const CoefficientField& u) {
    CoefficientField v = zero_field(u.group);
    for (const auto& rep : u.reps) v.ensure(rep);
    for (std::size_t i = 0; i < v.reps.size(); ++i) {
        const RepPoint& rep = v.reps[i];
        const ConjRule rule = conjugate_rep(u.group, rep);
        const std::size_t src = u.find(rule.target);
        if (src == CoefficientField::npos) continue;
        const auto entries = rep_entries(u.group, rep);
        for (int r = 0; r < rep.dim; ++r) {
            const int mr = flat_of_entry(u.group, rule.target, rule.entry_map(entries[r]));
            for (int c = 0; c < rep.dim; ++c) {
                const int mc =
                    flat_of_entry(u.group, rule.target, rule.entry_map(entries[c]));
                const cplx src_val =
                    u.mats[src][static_cast<std::size_t>(mr) * rule.target.dim + mc];
                v.mats[i][static_cast<std::size_t>(r) * rep.dim + c] =
                    rule.phase(entries[r], entries[c]) * std::conj(src_val);
            }
        }
    }
    return v;
}

inline CoefficientField field_combine(cplx a, const CoefficientField& u, cplx b,
                                      const CoefficientField& v) {
    if (!(u.group == v.group)) throw ConfigError("field combination across different groups");
    CoefficientField out = zero_field(u.group);
    for (const auto& rep : u.reps) out.ensure(rep);
    for (const auto& rep : v.reps) out.ensure(rep);
    for (std::size_t i = 0; i < out.reps.size(); ++i) {
        const std::size_t iu = u.find(out.reps[i]);
        const std::size_t iv = v.find(out.reps[i]);
        auto& m = out.mats[i];
        for (std::size_t e = 0; e < m.size(); ++e) {
            cplx s = 0.0;
            if (iu != CoefficientField::npos) s += a * u.mats[iu][e];
            if (iv != CoefficientField::npos) s += b * v.mats[iv][e];
            m[e] = s;
        }
    }
    return out;
}

/// Row-indexed multiplier action: out(xi)_{mn} = row_values(xi)[m] * u(xi)_{mn}.
/// The callable returns the length-d vector of row factors for a rep.
template <typename RowFn>
CoefficientField apply_row_multiplier(const CoefficientField& u, RowFn&& row_values) {
    CoefficientField out = u;
    for (std::size_t i = 0; i < out.reps.size(); ++i) {
        const RepPoint& rep = out.reps[i];
        const std::vector<cplx> rv = row_values(rep);
        if (static_cast<int>(rv.size()) != rep.dim)
            throw ConfigError("row multiplier length mismatch at rep " + rep_label(rep));
        for (int r = 0; r < rep.dim; ++r)
            for (int c = 0; c < rep.dim; ++c)
                out.mats[i][static_cast<std::size_t>(r) * rep.dim + c] *= rv[r];
    }
    return out;
}

inline double sup_norm(const CoefficientField& u) {
    double m = 0.0;
    for (const auto& mat : u.mats)
        for (const cplx& z : mat) m = std::max(m, std::abs(z));
    return m;
}

/// Per-rep magnitude (max |entry|) with matching weights, for power-law fits.
inline std::pair<std::vector<double>, std::vector<double>>
field_magnitudes(const CoefficientField& u) {
    std::vector<double> w, v;
    w.reserve(u.reps.size());
    v.reserve(u.reps.size());
    for (std::size_t i = 0; i < u.reps.size(); ++i) {
        double m = 0.0;
        for (const cplx& z : u.mats[i]) m = std::max(m, std::abs(z));
        w.push_back(u.reps[i].weight);
        v.push_back(m);
    }
    return {std::move(w), std::move(v)};
}

/// One stored entry of a time-dependent field: flat (row, col) and T+1
/// samples on the closed uniform grid over [0, 2pi].
struct TimeEntry {
    int row = 0;
    int col = 0;
    std::vector<cplx> samples;
};

struct TimeRecord {
    RepPoint rep;
    std::vector<TimeEntry> entries;
};

/// Sparse-in-entries map rep -> sampled coefficient functions, one shared
/// grid for every entry.
struct TimeCoefficientField {
    GroupSpec group;
    int grid = 0; // T; each sample vector has T + 1 points
    std::vector<TimeRecord> records; // sorted by RepOrder

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t find(const RepPoint& r) const {
        const auto it = std::lower_bound(
            records.begin(), records.end(), r,
            [](const TimeRecord& a, const RepPoint& b) { return RepOrder{}(a.rep, b); });
        if (it == records.end() || !(it->rep == r)) return npos;
        return static_cast<std::size_t>(it - records.begin());
    }

    std::size_t ensure(const RepPoint& r) {
        const auto it = std::lower_bound(
            records.begin(), records.end(), r,
            [](const TimeRecord& a, const RepPoint& b) { return RepOrder{}(a.rep, b); });
        const std::size_t i = static_cast<std::size_t>(it - records.begin());
        if (it != records.end() && it->rep == r) return i;
        records.insert(it, TimeRecord{r, {}});
        return i;
    }

    const std::vector<cplx>* entry(const RepPoint& r, int row, int col) const {
        const std::size_t i = find(r);
        if (i == npos) return nullptr;
        for (const auto& e : records[i].entries)
            if (e.row == row && e.col == col) return &e.samples;
        return nullptr;
    }

    std::vector<cplx>& entry_mut(const RepPoint& r, int row, int col) {
        const std::size_t i = ensure(r);
        for (auto& e : records[i].entries)
            if (e.row == row && e.col == col) return e.samples;
        records[i].entries.push_back(
            TimeEntry{row, col, std::vector<cplx>(static_cast<std::size_t>(grid) + 1)});
        return records[i].entries.back().samples;
    }
};

inline void validate_grid(int T) {
    if (T < 4 || (T % 2) != 0)
        throw ConfigError("time grid size must be even and at least 4");
}

inline TimeCoefficientField zero_time_field(const GroupSpec& g, int T) {
    if (g.factors.empty()) throw ConfigError("group spec has no factors");
    validate_grid(T);
    return TimeCoefficientField{g, T, {}};
}

/// Per-rep sup over entries and time, with weights, for decay fits.
inline std::pair<std::vector<double>, std::vector<double>>
time_field_magnitudes(const TimeCoefficientField& u) {
    std::vector<double> w, v;
    for (const auto& rec : u.records) {
        double m = 0.0;
        for (const auto& e : rec.entries)
            for (const cplx& z : e.samples) m = std::max(m, std::abs(z));
        w.push_back(rec.rep.weight);
        v.push_back(m);
    }
    return {std::move(w), std::move(v)};
}

} // namespace vekua
