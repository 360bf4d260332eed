#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vekua/base.hpp"

namespace vekua {

/// Building blocks of the supported compact groups.  A group is an ordered
/// product of these factors.
enum class Factor { circle, sphere3 };

struct GroupSpec {
    std::vector<Factor> factors;

    std::size_t n_factors() const { return factors.size(); }

    std::size_t n_spheres() const {
        return static_cast<std::size_t>(
            std::count(factors.begin(), factors.end(), Factor::sphere3));
    }

    bool operator==(const GroupSpec& o) const { return factors == o.factors; }
};

inline GroupSpec make_group(std::vector<Factor> fs) {
    if (fs.empty()) throw ConfigError("group spec has no factors");
    return GroupSpec{std::move(fs)};
}

inline GroupSpec make_group(std::initializer_list<Factor> fs) {
    return make_group(std::vector<Factor>(fs));
}

/// One point of the unitary dual.  `idx` holds, per factor, the circle
/// frequency k or the doubled sphere index 2*ell.  Doubling keeps
/// half-integer spins exact.
struct RepPoint {
    std::vector<int> idx;
    int dim = 1;
    double weight = 1.0;
    // 4 * weight^2, an exact integer: 4 + 4*sum k^2 + sum (2l)(2l+2).
    std::int64_t weight_key = 4;

    bool operator==(const RepPoint& o) const { return idx == o.idx; }
    bool operator!=(const RepPoint& o) const { return !(*this == o); }
};

/// Row or column label of a coefficient matrix: one doubled index 2*m per
/// sphere3 factor (circle factors contribute nothing).
struct EntryIndex {
    std::vector<int> twice_m;

    bool operator==(const EntryIndex& o) const { return twice_m == o.twice_m; }
    bool operator!=(const EntryIndex& o) const { return !(*this == o); }
};

inline RepPoint make_rep(const GroupSpec& g, std::vector<int> idx) {
    if (g.factors.empty()) throw ConfigError("group spec has no factors");
    if (idx.size() != g.n_factors())
        throw ConfigError("rep index count does not match the group's factor count");
    RepPoint r;
    r.idx = std::move(idx);
    std::int64_t key = 4;
    int dim = 1;
    for (std::size_t f = 0; f < g.n_factors(); ++f) {
        const std::int64_t v = r.idx[f];
        if (g.factors[f] == Factor::circle) {
            key += 4 * v * v;
        } else {
            if (v < 0) throw ConfigError("sphere3 index 2*ell must be nonnegative");
            key += v * (v + 2);
            dim *= static_cast<int>(v) + 1;
        }
    }
    r.weight_key = key;
    r.weight = std::sqrt(static_cast<double>(key)) / 2.0;
    r.dim = dim;
    return r;
}

/// Enumeration order: weight first, then factor-wise with |k| ascending and
/// positive k ahead of -k.
struct RepOrder {
    bool operator()(const RepPoint& a, const RepPoint& b) const {
        if (a.weight_key != b.weight_key) return a.weight_key < b.weight_key;
        const std::size_t n = std::min(a.idx.size(), b.idx.size());
        for (std::size_t f = 0; f < n; ++f) {
            const int x = a.idx[f], y = b.idx[f];
            if (std::abs(x) != std::abs(y)) return std::abs(x) < std::abs(y);
            if (x != y) return x > y; // +k before -k
        }
        return a.idx.size() < b.idx.size();
    }
};

inline std::string rep_label(const RepPoint& r) {
    std::ostringstream os;
    os << '(';
    for (std::size_t f = 0; f < r.idx.size(); ++f) {
        if (f) os << ',';
        os << r.idx[f];
    }
    os << ')';
    return os.str();
}

inline std::string entry_label(const EntryIndex& e) {
    std::ostringstream os;
    os << '[';
    for (std::size_t f = 0; f < e.twice_m.size(); ++f) {
        if (f) os << ',';
        os << e.twice_m[f];
    }
    os << ']';
    return os.str();
}

/// Validates |2m| <= 2l with matching parity on every sphere3 factor.
inline void check_entry(const GroupSpec& g, const RepPoint& r, const EntryIndex& e) {
    if (e.twice_m.size() != g.n_spheres())
        throw ConfigError("entry index count does not match the sphere3 factor count");
    std::size_t s = 0;
    for (std::size_t f = 0; f < g.n_factors(); ++f) {
        if (g.factors[f] != Factor::sphere3) continue;
        const int tl = r.idx[f], tm = e.twice_m[s++];
        if (std::abs(tm) > tl || ((tm - tl) % 2) != 0)
            throw ConfigError("entry index " + entry_label(e) + " invalid for rep " +
                              rep_label(r));
    }
}

/// Flat row/column position of an entry, row-major across sphere3 factors in
/// group order.
inline int flat_of_entry(const GroupSpec& g, const RepPoint& r, const EntryIndex& e) {
    check_entry(g, r, e);
    int flat = 0;
    std::size_t s = 0;
    for (std::size_t f = 0; f < g.n_factors(); ++f) {
        if (g.factors[f] != Factor::sphere3) continue;
        const int tl = r.idx[f], tm = e.twice_m[s++];
        flat = flat * (tl + 1) + (tm + tl) / 2;
    }
    return flat;
}

inline EntryIndex entry_of_flat(const GroupSpec& g, const RepPoint& r, int flat) {
    EntryIndex e;
    e.twice_m.assign(g.n_spheres(), 0);
    std::size_t s = g.n_spheres();
    for (std::size_t f = g.n_factors(); f-- > 0;) {
        if (g.factors[f] != Factor::sphere3) continue;
        const int tl = r.idx[f], d = tl + 1;
        --s;
        e.twice_m[s] = 2 * (flat % d) - tl;
        flat /= d;
    }
    return e;
}

/// How conjugation acts on a rep: the partner rep, the entry relabeling, and
/// the scalar phase attached to an entry pair.
struct ConjRule {
    RepPoint target;
    bool self_dual = false;

    EntryIndex entry_map(const EntryIndex& e) const {
        EntryIndex out = e;
        for (int& tm : out.twice_m) tm = -tm;
        return out;
    }

    /// Phase of the entry (row, col): product over sphere3 factors of
    /// (-1)^(m - n).  Always +1 or -1 since m - n is an integer.
    double phase(const EntryIndex& row, const EntryIndex& col) const {
        int half_sum = 0;
        for (std::size_t s = 0; s < row.twice_m.size(); ++s)
            half_sum += (row.twice_m[s] - col.twice_m[s]) / 2;
        return (half_sum % 2) ? -1.0 : 1.0;
    }
};

/// Circle frequencies negate; sphere3 factors keep their spin.
inline ConjRule conjugate_rep(const GroupSpec& g, const RepPoint& r) {
    std::vector<int> idx = r.idx;
    bool self = true;
    for (std::size_t f = 0; f < g.n_factors(); ++f) {
        if (g.factors[f] == Factor::circle) {
            idx[f] = -idx[f];
            if (idx[f] != r.idx[f]) self = false;
        }
    }
    ConjRule rule;
    rule.target = make_rep(g, std::move(idx));
    rule.self_dual = self;
    return rule;
}

namespace detail {

inline void enumerate_rec(const GroupSpec& g, std::size_t f, std::int64_t used,
                          std::int64_t budget, std::vector<int>& idx,
                          std::vector<RepPoint>& out) {
    if (f == g.n_factors()) {
        out.push_back(make_rep(g, idx));
        return;
    }
    if (g.factors[f] == Factor::circle) {
        for (std::int64_t k = 0; 4 * k * k <= budget - used; ++k) {
            idx[f] = static_cast<int>(k);
            enumerate_rec(g, f + 1, used + 4 * k * k, budget, idx, out);
            if (k > 0) {
                idx[f] = static_cast<int>(-k);
                enumerate_rec(g, f + 1, used + 4 * k * k, budget, idx, out);
            }
        }
    } else {
        for (std::int64_t tl = 0; tl * (tl + 2) <= budget - used; ++tl) {
            idx[f] = static_cast<int>(tl);
            enumerate_rec(g, f + 1, used + tl * (tl + 2), budget, idx, out);
        }
    }
}

} // namespace detail

/// All reps with weight <= cutoff, sorted by RepOrder.  The result is closed
/// under conjugation and free of duplicates.
inline std::vector<RepPoint> enumerate_reps(const GroupSpec& g, double cutoff) {
    if (g.factors.empty()) throw ConfigError("group spec has no factors");
    if (!(cutoff >= 1.0)) throw ConfigError("cutoff must be at least 1");
    // weight <= cutoff in exact arithmetic: weight_key <= 4*cutoff^2, with a
    // hair of slack so representable boundaries land inside.
    const std::int64_t budget =
        static_cast<std::int64_t>(std::floor(4.0 * cutoff * cutoff * (1.0 + 1e-12) + 1e-9)) - 4;
    std::vector<RepPoint> out;
    std::vector<int> idx(g.n_factors(), 0);
    detail::enumerate_rec(g, 0, 0, budget, idx, out);
    std::sort(out.begin(), out.end(), RepOrder{});
    return out;
}

/// All row entries of a rep in flat order.
inline std::vector<EntryIndex> rep_entries(const GroupSpec& g, const RepPoint& r) {
    std::vector<EntryIndex> out;
    out.reserve(static_cast<std::size_t>(r.dim));
    for (int i = 0; i < r.dim; ++i) out.push_back(entry_of_flat(g, r, i));
    return out;
}

} // namespace vekua
