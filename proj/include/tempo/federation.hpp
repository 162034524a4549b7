#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tempo/dbm.hpp"

namespace tempo {

// Finite union of non-empty canonical zones of one dimension. Members are
// kept non-redundant: no member is included in another.
class Federation {
public:
    explicit Federation(int dim) : dim_(dim) {}

    static Federation from(const Dbm& z) {
        Federation f(z.dim());
        f.insert(z);
        return f;
    }

    int dim() const { return dim_; }
    bool is_empty() const { return zones_.empty(); }
    const std::vector<Dbm>& zones() const { return zones_; }
    size_t size() const { return zones_.size(); }

    void insert(const Dbm& z) {
        if (z.is_empty()) return;
        if (z.dim() != dim_) throw ModelError("federation dimension mismatch");
        for (const Dbm& m : zones_)
            if (m.includes(z)) return;
        zones_.erase(std::remove_if(zones_.begin(), zones_.end(),
                                    [&](const Dbm& m) { return z.includes(m); }),
                     zones_.end());
        zones_.push_back(z);
    }

    // Returns true when the union grew (for fixpoint loops).
    bool merge(const Federation& other) {
        bool grew = false;
        for (const Dbm& z : other.zones_) {
            if (any_member_includes(z)) continue;
            if (covers(z)) continue;
            insert(z);
            grew = true;
        }
        return grew;
    }

    // Cheap member-wise subsumption test (sufficient, not exact).
    bool any_member_includes(const Dbm& z) const {
        for (const Dbm& m : zones_)
            if (m.includes(z)) return true;
        return false;
    }

    // Exact point-set inclusion of a single zone.
    bool covers(const Dbm& z) const {
        if (z.is_empty()) return true;
        Federation rest = Federation::from(z);
        for (const Dbm& m : zones_) {
            rest = rest.subtract_zone(m);
            if (rest.is_empty()) return true;
        }
        return rest.is_empty();
    }

    // Exact inclusion via subtraction emptiness.
    bool includes(const Federation& other) const {
        if (dim_ != other.dim_) throw ModelError("federation dimension mismatch");
        for (const Dbm& z : other.zones_)
            if (!covers(z)) return false;
        return true;
    }

    bool same_set(const Federation& other) const {
        return includes(other) && other.includes(*this);
    }

    // Set difference with one zone; splits along each tightened facet of b
    // in matrix index order, which keeps the output deterministic.
    Federation subtract_zone(const Dbm& b) const {
        if (b.is_empty()) return *this;
        if (b.dim() != dim_) throw ModelError("federation dimension mismatch");
        Federation out(dim_);
        for (const Dbm& a : zones_) {
            if (b.includes(a)) continue;
            Dbm rest = a;
            bool done = false;
            for (int i = 0; i < dim_ && !done; ++i)
                for (int j = 0; j < dim_ && !done; ++j) {
                    if (i == j) continue;
                    bound_t bb = b(i, j);
                    if (bb == kBoundInf) continue;
                    Dbm piece = rest.constrained(j, i, bound_negate(bb));
                    if (!piece.is_empty()) out.insert(piece);
                    rest = rest.constrained(i, j, bb);
                    if (rest.is_empty()) done = true;
                }
        }
        return out;
    }

    Federation subtract(const Federation& b) const {
        if (dim_ != b.dim_) throw ModelError("federation dimension mismatch");
        Federation out = *this;
        for (const Dbm& z : b.zones_) {
            out = out.subtract_zone(z);
            if (out.is_empty()) break;
        }
        return out;
    }

    Federation intersect_zone(const Dbm& z) const {
        Federation out(dim_);
        for (const Dbm& a : zones_) out.insert(a.intersect(z));
        return out;
    }

    Federation intersect(const Federation& other) const {
        Federation out(dim_);
        for (const Dbm& a : zones_)
            for (const Dbm& b : other.zones_) out.insert(a.intersect(b));
        return out;
    }

    Federation constrained(const std::vector<DiffConstraint>& cs) const {
        Federation out(dim_);
        for (const Dbm& a : zones_) out.insert(a.constrained(cs));
        return out;
    }

    Federation down() const { return map([](const Dbm& z) { return z.down(); }); }
    Federation down_strict() const { return map([](const Dbm& z) { return z.down_strict(); }); }
    Federation up() const { return map([](const Dbm& z) { return z.up(); }); }
    Federation freed(int clock) const {
        return map([clock](const Dbm& z) { return z.freed(clock); });
    }
    Federation reset(int clock) const {
        return map([clock](const Dbm& z) { return z.reset(clock); });
    }
    Federation extrapolated(const std::vector<int>& k) const {
        return map([&k](const Dbm& z) { return z.extrapolated(k); });
    }
    Federation lifted() const {
        Federation out(dim_ + 1);
        for (const Dbm& a : zones_) out.insert(a.lifted());
        return out;
    }
    Federation dropped_last() const {
        Federation out(dim_ - 1);
        for (const Dbm& a : zones_) out.insert(a.dropped_last());
        return out;
    }

    bool contains(const std::vector<int64_t>& units, int64_t scale = 2) const {
        for (const Dbm& z : zones_)
            if (z.contains(units, scale)) return true;
        return false;
    }

    std::string to_string(const std::vector<std::string>* names = nullptr) const {
        if (zones_.empty()) return "false";
        std::string s;
        for (size_t i = 0; i < zones_.size(); ++i) {
            if (i) s += " || ";
            s += "(" + zones_[i].to_string(names) + ")";
        }
        return s;
    }

private:
    template <typename F>
    Federation map(F&& f) const {
        Federation out(dim_);
        for (const Dbm& a : zones_) out.insert(f(a));
        return out;
    }

    int dim_;
    std::vector<Dbm> zones_;
};

inline Federation fed_subtract(const Federation& a, const Federation& b) {
    return a.subtract(b);
}

inline bool fed_includes(const Federation& a, const Federation& b) {
    return a.includes(b);
}

}  // namespace tempo
