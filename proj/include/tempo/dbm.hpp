#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tempo/bound.hpp"

namespace tempo {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One atomic difference constraint x_lhs - x_rhs <= / < c, with clock index 0
// denoting the constant-zero reference clock.
struct DiffConstraint {
    int lhs = 0;
    int rhs = 0;
    bound_t bound = kBoundInf;
};

// Canonical difference bound matrix over dim clocks (index 0 is the reference
// clock). Entry (i,j) bounds x_i - x_j. Non-empty instances are kept in
// closed (all-pairs tightest) form at all times; emptiness is an explicit
// flag, not an error. Values are immutable after construction: every
// operation returns a fresh matrix, so instances can be shared freely
// across threads.
class Dbm {
public:
    // Universe: all clocks nonnegative, otherwise unconstrained.
    explicit Dbm(int dim) : dim_(dim), m_(static_cast<size_t>(dim) * dim, kBoundInf) {
        assert(dim >= 1);
        for (int i = 0; i < dim_; ++i) at(i, i) = kLeZero;
        for (int j = 1; j < dim_; ++j) at(0, j) = kLeZero;
    }

    static Dbm universe(int dim) { return Dbm(dim); }

    // The single point where all clocks are zero.
    static Dbm zero(int dim) {
        Dbm z(dim);
        for (auto& b : z.m_) b = kLeZero;
        return z;
    }

    static Dbm empty(int dim) {
        Dbm z(dim);
        z.empty_ = true;
        return z;
    }

    static Dbm from_constraints(int dim, const std::vector<DiffConstraint>& cs) {
        Dbm z(dim);
        for (const auto& c : cs) {
            z.check_index(c.lhs);
            z.check_index(c.rhs);
            if (c.bound < z.at(c.lhs, c.rhs)) z.at(c.lhs, c.rhs) = c.bound;
        }
        return z.canonicalize();
    }

    int dim() const { return dim_; }
    bool is_empty() const { return empty_; }

    bound_t operator()(int i, int j) const { return m_[static_cast<size_t>(i) * dim_ + j]; }

    // All-pairs tightening; flags empty on a negative cycle. Idempotent.
    Dbm canonicalize() const {
        Dbm r = *this;
        if (r.empty_) return r;
        for (int k = 0; k < dim_; ++k)
            for (int i = 0; i < dim_; ++i) {
                bound_t ik = r.at(i, k);
                if (ik == kBoundInf) continue;
                for (int j = 0; j < dim_; ++j) {
                    bound_t cand = bound_add(ik, r.at(k, j));
                    if (cand < r.at(i, j)) r.at(i, j) = cand;
                }
            }
        for (int i = 0; i < dim_; ++i)
            if (r.at(i, i) < kLeZero) {
                r.empty_ = true;
                return r;
            }
        return r;
    }

    // Delay closure: remove individual upper bounds, keep differences.
    Dbm up() const {
        assert(!empty_);
        Dbm r = *this;
        for (int i = 1; i < dim_; ++i) r.at(i, 0) = kBoundInf;
        return r;
    }

    // Time predecessor intersected with the nonnegative orthant.
    Dbm down() const {
        assert(!empty_);
        Dbm r = *this;
        for (int j = 1; j < dim_; ++j) {
            bound_t lo = kLeZero;
            for (int i = 1; i < dim_; ++i)
                if (r.at(i, j) < lo) lo = r.at(i, j);
            r.at(0, j) = lo;
        }
        return r;
    }

    // Strict time predecessor: points from which the zone is reached after a
    // positive delay. Same as down() except the upper facets, which can only
    // be reached at delay zero, become strict.
    Dbm down_strict() const {
        assert(!empty_);
        Dbm r = down();
        for (int i = 1; i < dim_; ++i) r.at(i, 0) = bound_strictify(r.at(i, 0));
        return r.canonicalize();
    }

    // Topological closure: every strict facet weakened.
    Dbm closure() const {
        assert(!empty_);
        Dbm r = *this;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                if (i != j) r.at(i, j) = bound_weaken(r.at(i, j));
        return r;
    }

    // Conjunction with one atomic constraint, O(dim^2) retightening.
    Dbm constrained(int lhs, int rhs, bound_t b) const {
        check_index(lhs);
        check_index(rhs);
        Dbm r = *this;
        if (r.empty_) return r;
        if (bound_add(r.at(rhs, lhs), b) < kLeZero) {
            r.empty_ = true;
            return r;
        }
        if (b < r.at(lhs, rhs)) {
            r.at(lhs, rhs) = b;
            for (int i = 0; i < dim_; ++i) {
                bound_t ia = r.at(i, lhs);
                if (ia == kBoundInf) continue;
                bound_t through = bound_add(ia, b);
                for (int j = 0; j < dim_; ++j) {
                    bound_t cand = bound_add(through, r.at(rhs, j));
                    if (cand < r.at(i, j)) r.at(i, j) = cand;
                }
            }
        }
        return r;
    }

    Dbm constrained(const std::vector<DiffConstraint>& cs) const {
        Dbm r = *this;
        for (const auto& c : cs) {
            if (r.empty_) return r;
            r = r.constrained(c.lhs, c.rhs, c.bound);
        }
        return r;
    }

    // x := 0.
    Dbm reset(int clock) const {
        check_clock(clock);
        assert(!empty_);
        Dbm r = *this;
        for (int j = 0; j < dim_; ++j) {
            r.at(clock, j) = r.at(0, j);
            r.at(j, clock) = r.at(j, 0);
        }
        r.at(clock, clock) = kLeZero;
        return r;
    }

    // Existentially release one clock: only nonnegativity survives.
    Dbm freed(int clock) const {
        check_clock(clock);
        assert(!empty_);
        Dbm r = *this;
        for (int j = 0; j < dim_; ++j) {
            if (j == clock) continue;
            r.at(clock, j) = kBoundInf;
            r.at(j, clock) = r.at(j, 0);
        }
        return r;
    }

    // Pointwise bound comparison; exact inclusion for canonical forms.
    bool includes(const Dbm& other) const {
        if (other.empty_) return true;
        if (empty_) return false;
        if (dim_ != other.dim_) throw ModelError("dbm dimension mismatch");
        for (size_t k = 0; k < m_.size(); ++k)
            if (m_[k] < other.m_[k]) return false;
        return true;
    }

    bool same_set(const Dbm& other) const { return includes(other) && other.includes(*this); }

    // Classic per-clock k-normalization over every entry, re-canonicalized.
    // Entry (i,j): widen past (k_i, <=) to infinity, clamp below (-k_j, <).
    Dbm extrapolated(const std::vector<int>& k) const {
        assert(!empty_);
        assert(static_cast<int>(k.size()) >= dim_ - 1);
        Dbm r = *this;
        bool changed = false;
        auto kof = [&](int idx) { return idx == 0 ? 0 : k[idx - 1]; };
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                if (i == j) continue;
                bound_t b = r.at(i, j);
                if (b == kBoundInf) continue;
                if (i != 0 && b > make_bound(kof(i), true)) {
                    r.at(i, j) = kBoundInf;
                    changed = true;
                } else if (j != 0 && b < make_bound(-kof(j), false)) {
                    r.at(i, j) = make_bound(-kof(j), false);
                    changed = true;
                }
            }
        return changed ? r.canonicalize() : r;
    }

    // Append one unconstrained nonnegative clock as the last index.
    Dbm lifted() const {
        assert(!empty_);
        Dbm r(dim_ + 1);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) r.at(i, j) = at(i, j);
        int z = dim_;
        for (int j = 0; j < dim_; ++j) {
            r.at(z, j) = kBoundInf;
            r.at(j, z) = at(j, 0);
        }
        r.at(z, z) = kLeZero;
        return r;
    }

    // Existential projection of the last clock (drop its row and column).
    Dbm dropped_last() const {
        assert(dim_ >= 2);
        Dbm r(dim_ - 1);
        if (empty_) return Dbm::empty(dim_ - 1);
        for (int i = 0; i < dim_ - 1; ++i)
            for (int j = 0; j < dim_ - 1; ++j) r.at(i, j) = at(i, j);
        return r;
    }

    Dbm intersect(const Dbm& other) const {
        if (dim_ != other.dim_) throw ModelError("dbm dimension mismatch");
        if (empty_) return *this;
        if (other.empty_) return other;
        Dbm r = *this;
        for (size_t i = 0; i < m_.size(); ++i)
            if (other.m_[i] < r.m_[i]) r.m_[i] = other.m_[i];
        return r.canonicalize();
    }

    // Membership of a concrete valuation given in fixed-point units of
    // 1/scale (half-units by default); index 0 is implicitly zero.
    bool contains(const std::vector<int64_t>& units, int64_t scale = 2) const {
        if (empty_) return false;
        assert(static_cast<int>(units.size()) == dim_ - 1);
        auto value = [&](int i) -> int64_t { return i == 0 ? 0 : units[i - 1]; };
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                bound_t b = at(i, j);
                if (b == kBoundInf) continue;
                int64_t diff = value(i) - value(j);
                int64_t lim = scale * bound_constant(b);
                if (bound_is_weak(b) ? diff > lim : diff >= lim) return false;
            }
        return true;
    }

    bool operator==(const Dbm& other) const {
        if (empty_ || other.empty_) return empty_ == other.empty_ && dim_ == other.dim_;
        return dim_ == other.dim_ && m_ == other.m_;
    }

    std::string to_string(const std::vector<std::string>* names = nullptr) const {
        if (empty_) return "false";
        auto name = [&](int i) {
            if (i == 0) return std::string("0");
            if (names && i - 1 < static_cast<int>(names->size())) return (*names)[i - 1];
            return "x" + std::to_string(i);
        };
        std::ostringstream os;
        bool first = true;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                if (i == j) continue;
                bound_t b = at(i, j);
                if (b == kBoundInf) continue;
                if (i == 0 && b == kLeZero) continue;
                if (!first) os << " && ";
                first = false;
                os << name(i) << "-" << name(j) << (bound_is_weak(b) ? "<=" : "<")
                   << bound_constant(b);
            }
        return first ? "true" : os.str();
    }

    size_t hash() const {
        size_t h = std::hash<int>()(dim_) ^ (empty_ ? 0x9e3779b9 : 0);
        if (!empty_)
            for (bound_t b : m_) h = h * 1000003u + static_cast<uint32_t>(b);
        return h;
    }

private:
    bound_t& at(int i, int j) { return m_[static_cast<size_t>(i) * dim_ + j]; }
    bound_t at(int i, int j) const { return m_[static_cast<size_t>(i) * dim_ + j]; }

    void check_index(int i) const {
        if (i < 0 || i >= dim_) throw ModelError("clock index out of range");
    }
    void check_clock(int i) const {
        if (i < 1 || i >= dim_) throw ModelError("clock index out of range");
    }

    int dim_;
    std::vector<bound_t> m_;
    bool empty_ = false;
};

}  // namespace tempo
