#pragma once

// Test-only point-set oracle. Zone operations are interpreted directly as
// predicates over the half-integer lattice (coordinates in half-units, 2x the
// real value); existential witnesses are searched on an extended grid so that
// points entering or leaving the comparison window are still found. Fully
// independent of the DBM implementation path.

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "tempo/dbm.hpp"
#include "tempo/federation.hpp"

namespace oracle {

using Point = std::vector<int64_t>;
using PointSet = std::set<Point>;

struct Grid {
    int clocks;   // number of real clocks (dbm dim - 1)
    int max_hu;   // largest comparison coordinate, inclusive (2C+1)
    int wit_hu;   // witness search horizon, in half-units

    std::vector<Point> all_points() const {
        std::vector<Point> pts;
        Point cur(clocks, 0);
        rec(cur, 0, pts);
        return pts;
    }

private:
    void rec(Point& cur, int idx, std::vector<Point>& out) const {
        if (idx == clocks) {
            out.push_back(cur);
            return;
        }
        for (int64_t v = 0; v <= max_hu; ++v) {
            cur[idx] = v;
            rec(cur, idx + 1, out);
        }
    }
};

inline Grid make_grid(int clocks, int max_const) {
    // Canonical constants are sums of a few input constants; a horizon of
    // 3*max_const past the window covers every witness the tests need.
    int max_hu = 2 * max_const + 1;
    return {clocks, max_hu, max_hu + 6 * max_const + 2};
}

template <typename Member>
PointSet collect(const Grid& g, Member&& member) {
    PointSet s;
    for (const Point& p : g.all_points())
        if (member(p)) s.insert(p);
    return s;
}

inline PointSet points_of(const tempo::Dbm& z, const Grid& g) {
    return collect(g, [&](const Point& p) { return z.contains(p); });
}

inline PointSet points_of(const tempo::Federation& f, const Grid& g) {
    return collect(g, [&](const Point& p) { return f.contains(p); });
}

// Witness searches run in quarter-units: delay or rebinding intervals have
// half-integer endpoints, so every non-empty open interval holds a quarter
// point even when it holds no half-integer one.
inline Point quarters(const Point& half_units) {
    Point q = half_units;
    for (auto& c : q) c *= 2;
    return q;
}

// {v + d | v in z, d >= 0}
inline PointSet up(const tempo::Dbm& z, const Grid& g) {
    return collect(g, [&](const Point& p) {
        Point base = quarters(p);
        int64_t dmax = 0;
        for (int64_t c : base) dmax = std::max(dmax, c);
        for (int64_t d = 0; d <= dmax; ++d) {
            Point q = base;
            bool ok = true;
            for (auto& c : q)
                if ((c -= d) < 0) ok = false;
            if (ok && z.contains(q, 4)) return true;
        }
        return false;
    });
}

// {v | exists d >= 0 with v + d in z}
inline PointSet down(const tempo::Dbm& z, const Grid& g, int64_t min_delay = 0) {
    return collect(g, [&](const Point& p) {
        Point base = quarters(p);
        for (int64_t d = min_delay; d <= 2 * g.wit_hu; ++d) {
            Point q = base;
            for (auto& c : q) c += d;
            if (z.contains(q, 4)) return true;
        }
        return false;
    });
}

// {v | exists d > 0 with v + d in z}
inline PointSet down_strict(const tempo::Dbm& z, const Grid& g) { return down(z, g, 1); }

// Image of clock := 0.
inline PointSet reset(const tempo::Dbm& z, int clock, const Grid& g) {
    return collect(g, [&](const Point& p) {
        if (p[clock - 1] != 0) return false;
        Point q = quarters(p);
        for (int64_t c = 0; c <= 2 * g.wit_hu; ++c) {
            q[clock - 1] = c;
            if (z.contains(q, 4)) return true;
        }
        return false;
    });
}

// Union over all rebindings of one clock.
inline PointSet free_clock(const tempo::Dbm& z, int clock, const Grid& g) {
    return collect(g, [&](const Point& p) {
        Point q = quarters(p);
        for (int64_t c = 0; c <= 2 * g.wit_hu; ++c) {
            q[clock - 1] = c;
            if (z.contains(q, 4)) return true;
        }
        return false;
    });
}

inline bool satisfies(const Point& p, const tempo::DiffConstraint& c) {
    int64_t lhs = c.lhs == 0 ? 0 : p[c.lhs - 1];
    int64_t rhs = c.rhs == 0 ? 0 : p[c.rhs - 1];
    int64_t lim = 2ll * tempo::bound_constant(c.bound);
    int64_t d = lhs - rhs;
    return tempo::bound_is_weak(c.bound) ? d <= lim : d < lim;
}

inline PointSet constrain(const tempo::Dbm& z, const std::vector<tempo::DiffConstraint>& cs,
                          const Grid& g) {
    return collect(g, [&](const Point& p) {
        if (!z.contains(p)) return false;
        for (const auto& c : cs)
            if (!satisfies(p, c)) return false;
        return true;
    });
}

inline PointSet set_minus(const PointSet& a, const PointSet& b) {
    PointSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
    return out;
}

inline bool subset(const PointSet& a, const PointSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Subset test enumerated over the extended witness grid, so separating
// points past the comparison window (from derived bounds) are still seen.
template <typename InA, typename InB>
bool subset_extended(const Grid& g, InA&& in_a, InB&& in_b) {
    Point p(g.clocks, 0);
    for (;;) {
        if (in_a(p) && !in_b(p)) return false;
        int i = 0;
        while (i < g.clocks && p[i] == g.wit_hu) p[i++] = 0;
        if (i == g.clocks) return true;
        ++p[i];
    }
}

// Random canonical zone built from a handful of random atomic constraints.
inline tempo::Dbm random_dbm(std::mt19937& rng, int clocks, int max_const) {
    std::uniform_int_distribution<int> n_cs(0, 5);
    std::uniform_int_distribution<int> idx(0, clocks);
    std::uniform_int_distribution<int> cst(-max_const, max_const);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<tempo::DiffConstraint> cs;
    int n = n_cs(rng);
    for (int i = 0; i < n; ++i) {
        int a = idx(rng), b = idx(rng);
        if (a == b) continue;
        int c = cst(rng);
        if (a == 0 && c < 0) c = -c;  // keep a chance of non-emptiness
        cs.push_back({a, b, tempo::make_bound(c, coin(rng) == 1)});
    }
    return tempo::Dbm::from_constraints(clocks + 1, cs);
}

inline tempo::Dbm random_nonempty_dbm(std::mt19937& rng, int clocks, int max_const) {
    for (;;) {
        tempo::Dbm z = random_dbm(rng, clocks, max_const);
        if (!z.is_empty()) return z;
    }
}

}  // namespace oracle
