#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tempo/dbm.hpp"

namespace tempo {

enum class Rel { Lt, Le, Eq, Gt, Ge };

inline const char* rel_text(Rel r) {
    switch (r) {
        case Rel::Lt: return "<";
        case Rel::Le: return "<=";
        case Rel::Eq: return "==";
        case Rel::Gt: return ">";
        case Rel::Ge: return ">=";
    }
    return "?";
}

inline bool rel_holds(Rel r, int64_t lhs, int64_t rhs) {
    switch (r) {
        case Rel::Lt: return lhs < rhs;
        case Rel::Le: return lhs <= rhs;
        case Rel::Eq: return lhs == rhs;
        case Rel::Gt: return lhs > rhs;
        case Rel::Ge: return lhs >= rhs;
    }
    return false;
}

// x_lhs - x_rhs  rel  constant, with rhs 0 meaning the reference clock
// (plain x rel c). Constants are natural numbers.
struct AtomicConstraint {
    int lhs = 0;
    int rhs = 0;
    Rel rel = Rel::Le;
    int constant = 0;

    void expand(std::vector<DiffConstraint>& out) const {
        switch (rel) {
            case Rel::Lt: out.push_back({lhs, rhs, make_bound(constant, false)}); break;
            case Rel::Le: out.push_back({lhs, rhs, make_bound(constant, true)}); break;
            case Rel::Eq:
                out.push_back({lhs, rhs, make_bound(constant, true)});
                out.push_back({rhs, lhs, make_bound(-constant, true)});
                break;
            case Rel::Gt: out.push_back({rhs, lhs, make_bound(-constant, false)}); break;
            case Rel::Ge: out.push_back({rhs, lhs, make_bound(-constant, true)}); break;
        }
    }
};

inline std::vector<DiffConstraint> expand_all(const std::vector<AtomicConstraint>& cs) {
    std::vector<DiffConstraint> out;
    for (const auto& c : cs) c.expand(out);
    return out;
}

struct DiscreteVar {
    std::string name;
    int lo = 0;
    int hi = 0;
    int init = 0;
};

enum class ChannelKind { Binary, Broadcast };

struct Channel {
    std::string name;
    ChannelKind kind = ChannelKind::Binary;
};

// Comparison between a variable and a constant or another variable.
struct DiscComparison {
    int var = 0;
    Rel rel = Rel::Eq;
    bool rhs_is_var = false;
    int rhs = 0;
};

// v := constant or v := other variable.
struct Assignment {
    int var = 0;
    bool rhs_is_var = false;
    int rhs = 0;
};

enum class Polarity { Send, Receive };

struct Sync {
    int channel = 0;
    Polarity polarity = Polarity::Send;
};

struct Edge {
    int src = 0;
    int dst = 0;
    std::vector<AtomicConstraint> clock_guard;
    std::vector<DiscComparison> disc_guard;
    std::optional<Sync> sync;
    std::vector<int> resets;
    std::vector<Assignment> updates;
};

struct Location {
    std::string name;
    std::vector<AtomicConstraint> invariant;
};

struct Automaton {
    std::string name;
    std::vector<Location> locations;
    int initial = 0;
    std::vector<Edge> edges;

    int location_index(const std::string& loc) const {
        for (size_t i = 0; i < locations.size(); ++i)
            if (locations[i].name == loc) return static_cast<int>(i);
        return -1;
    }
};

struct Diagnostic {
    bool error = true;
    int line = 0;  // 0 when not tied to source text
    std::string message;
};

using DiscValues = std::vector<int>;
using LocationVector = std::vector<int>;

// A joint transition: the set of (process, edge) pairs that fire together.
// Internal moves have one element; binary handshakes two (sender first);
// broadcasts have the sender first and receivers in process order.
struct JointTransition {
    std::vector<std::pair<int, int>> parts;

    bool operator==(const JointTransition& o) const { return parts == o.parts; }
};

// The parallel composition: automata instantiation order fixes process
// indices; clocks and discrete variables are global namespaces shared by
// reference from edges. Networks are plain data, immutable once validated,
// and safe to read from any number of threads.
class Network {
public:
    std::vector<std::string> clocks;  // index 1..n maps to clocks[i-1]
    std::vector<DiscreteVar> vars;
    std::vector<Channel> channels;
    std::vector<Automaton> automata;

    int clock_count() const { return static_cast<int>(clocks.size()); }
    int process_count() const { return static_cast<int>(automata.size()); }

    int clock_index(const std::string& name) const {
        for (size_t i = 0; i < clocks.size(); ++i)
            if (clocks[i] == name) return static_cast<int>(i) + 1;
        return -1;
    }
    int var_index(const std::string& name) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return static_cast<int>(i);
        return -1;
    }
    int channel_index(const std::string& name) const {
        for (size_t i = 0; i < channels.size(); ++i)
            if (channels[i].name == name) return static_cast<int>(i);
        return -1;
    }
    int process_index(const std::string& name) const {
        for (size_t i = 0; i < automata.size(); ++i)
            if (automata[i].name == name) return static_cast<int>(i);
        return -1;
    }

    LocationVector initial_locations() const {
        LocationVector locs;
        for (const auto& a : automata) locs.push_back(a.initial);
        return locs;
    }

    DiscValues initial_values() const {
        DiscValues d;
        for (const auto& v : vars) d.push_back(v.init);
        return d;
    }

    // Conjunction of the location invariants as a zone over all clocks + any
    // extra trailing clocks the caller's dimension carries.
    Dbm invariant_zone(const LocationVector& locs, int dim) const {
        std::vector<DiffConstraint> cs;
        for (size_t p = 0; p < automata.size(); ++p)
            for (const auto& c : automata[p].locations[locs[p]].invariant) c.expand(cs);
        return Dbm::from_constraints(dim, cs);
    }

    bool disc_guard_holds(const std::vector<DiscComparison>& guard, const DiscValues& d) const {
        for (const auto& g : guard) {
            int64_t rhs = g.rhs_is_var ? d[g.rhs] : g.rhs;
            if (!rel_holds(g.rel, d[g.var], rhs)) return false;
        }
        return true;
    }

    // Applies updates in part order; returns nullopt if any value would
    // leave its domain.
    std::optional<DiscValues> apply_updates(const JointTransition& t, const DiscValues& d) const {
        DiscValues out = d;
        for (const auto& [proc, eidx] : t.parts) {
            for (const auto& u : automata[proc].edges[eidx].updates) {
                int val = u.rhs_is_var ? out[u.rhs] : u.rhs;
                if (val < vars[u.var].lo || val > vars[u.var].hi) return std::nullopt;
                out[u.var] = val;
            }
        }
        return out;
    }

    LocationVector apply_locations(const JointTransition& t, const LocationVector& locs) const {
        LocationVector out = locs;
        for (const auto& [proc, eidx] : t.parts) out[proc] = automata[proc].edges[eidx].dst;
        return out;
    }

    std::vector<int> joint_resets(const JointTransition& t) const {
        std::vector<int> r;
        for (const auto& [proc, eidx] : t.parts)
            for (int c : automata[proc].edges[eidx].resets) r.push_back(c);
        return r;
    }

    std::vector<DiffConstraint> joint_guard(const JointTransition& t) const {
        std::vector<DiffConstraint> cs;
        for (const auto& [proc, eidx] : t.parts)
            for (const auto& c : automata[proc].edges[eidx].clock_guard) c.expand(cs);
        return cs;
    }

    // Joint transitions enabled at the discrete level: internal edges,
    // binary handshakes between distinct processes, and broadcasts with the
    // maximal receiver set (possibly empty). Clock guards are not consulted
    // here; transitions whose updates would leave a domain are dropped.
    std::vector<JointTransition> enabled_edges(const LocationVector& locs,
                                               const DiscValues& disc) const {
        std::vector<JointTransition> out;
        int n = process_count();

        auto edge_enabled = [&](int p, const Edge& e) {
            return e.src == locs[p] && disc_guard_holds(e.disc_guard, disc);
        };

        for (int p = 0; p < n; ++p) {
            for (size_t ei = 0; ei < automata[p].edges.size(); ++ei) {
                const Edge& e = automata[p].edges[ei];
                if (!edge_enabled(p, e)) continue;
                if (!e.sync) {
                    push_checked(out, {{{p, static_cast<int>(ei)}}}, disc);
                    continue;
                }
                if (e.sync->polarity != Polarity::Send) continue;
                const Channel& ch = channels[e.sync->channel];
                if (ch.kind == ChannelKind::Binary) {
                    for (int q = 0; q < n; ++q) {
                        if (q == p) continue;
                        for (size_t qi = 0; qi < automata[q].edges.size(); ++qi) {
                            const Edge& r = automata[q].edges[qi];
                            if (!edge_enabled(q, r) || !r.sync) continue;
                            if (r.sync->channel != e.sync->channel ||
                                r.sync->polarity != Polarity::Receive)
                                continue;
                            push_checked(out,
                                         {{{p, static_cast<int>(ei)}, {q, static_cast<int>(qi)}}},
                                         disc);
                        }
                    }
                } else {
                    // One joint per combination of receiver edge choices.
                    std::vector<std::vector<int>> choices(n);
                    for (int q = 0; q < n; ++q) {
                        if (q == p) continue;
                        for (size_t qi = 0; qi < automata[q].edges.size(); ++qi) {
                            const Edge& r = automata[q].edges[qi];
                            if (!edge_enabled(q, r) || !r.sync) continue;
                            if (r.sync->channel == e.sync->channel &&
                                r.sync->polarity == Polarity::Receive)
                                choices[q].push_back(static_cast<int>(qi));
                        }
                    }
                    std::vector<std::pair<int, int>> parts{{p, static_cast<int>(ei)}};
                    expand_broadcast(out, parts, choices, 0, disc);
                }
            }
        }
        return out;
    }

    std::vector<Diagnostic> validate() const;
    std::string serialize() const;

    std::string joint_to_string(const JointTransition& t) const {
        std::string s;
        for (size_t i = 0; i < t.parts.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(t.parts[i].first) + ":" + std::to_string(t.parts[i].second);
        }
        return s;
    }

private:
    void push_checked(std::vector<JointTransition>& out, JointTransition t,
                      const DiscValues& disc) const {
        if (apply_updates(t, disc)) out.push_back(std::move(t));
    }

    void expand_broadcast(std::vector<JointTransition>& out,
                          std::vector<std::pair<int, int>>& parts,
                          const std::vector<std::vector<int>>& choices, int q,
                          const DiscValues& disc) const {
        int n = process_count();
        if (q == n) {
            push_checked(out, {parts}, disc);
            return;
        }
        if (choices[q].empty()) {
            expand_broadcast(out, parts, choices, q + 1, disc);
            return;
        }
        for (int ei : choices[q]) {
            parts.push_back({q, ei});
            expand_broadcast(out, parts, choices, q + 1, disc);
            parts.pop_back();
        }
    }
};

// Which clocks can still be read (guard or invariant) before their next
// reset, per location of each automaton. Clocks inactive everywhere in a
// configuration may be released soundly: their value cannot influence any
// future transition.
class ClockActivity {
public:
    explicit ClockActivity(const Network& net) : nclocks_(net.clock_count()) {
        active_.resize(net.automata.size());
        for (size_t p = 0; p < net.automata.size(); ++p) {
            const Automaton& a = net.automata[p];
            auto& act = active_[p];
            act.assign(a.locations.size(), std::vector<char>(nclocks_ + 1, 0));
            auto mark = [&](std::vector<char>& set, const std::vector<AtomicConstraint>& cs) {
                for (const auto& c : cs) {
                    if (c.lhs >= 1) set[c.lhs] = 1;
                    if (c.rhs >= 1) set[c.rhs] = 1;
                }
            };
            bool changed = true;
            while (changed) {
                changed = false;
                for (size_t l = 0; l < a.locations.size(); ++l) {
                    std::vector<char> want(nclocks_ + 1, 0);
                    mark(want, a.locations[l].invariant);
                    for (const auto& e : a.edges) {
                        if (e.src != static_cast<int>(l)) continue;
                        mark(want, e.clock_guard);
                        std::vector<char> from_dst = act[e.dst];
                        for (int r : e.resets) from_dst[r] = 0;
                        for (int c = 1; c <= nclocks_; ++c) want[c] |= from_dst[c];
                    }
                    for (int c = 1; c <= nclocks_; ++c)
                        if (want[c] && !act[l][c]) {
                            act[l][c] = 1;
                            changed = true;
                        }
                }
            }
        }
    }

    // Clocks with no possible future read from this configuration.
    std::vector<int> inactive(const LocationVector& locs) const {
        std::vector<char> act(nclocks_ + 1, 0);
        for (size_t p = 0; p < active_.size(); ++p)
            for (int c = 1; c <= nclocks_; ++c) act[c] |= active_[p][locs[p]][c];
        std::vector<int> out;
        for (int c = 1; c <= nclocks_; ++c)
            if (!act[c]) out.push_back(c);
        return out;
    }

private:
    int nclocks_;
    std::vector<std::vector<std::vector<char>>> active_;
};

// Per-clock maximum constants appearing in guards and invariants.
inline std::vector<int> model_max_constants(const Network& n) {
    std::vector<int> k(n.clock_count(), 0);
    auto scan = [&](const std::vector<AtomicConstraint>& cs) {
        for (const auto& c : cs) {
            if (c.lhs >= 1) k[c.lhs - 1] = std::max(k[c.lhs - 1], c.constant);
            if (c.rhs >= 1) k[c.rhs - 1] = std::max(k[c.rhs - 1], c.constant);
        }
    };
    for (const auto& a : n.automata) {
        for (const auto& l : a.locations) scan(l.invariant);
        for (const auto& e : a.edges) scan(e.clock_guard);
    }
    return k;
}

inline std::vector<Diagnostic> Network::validate() const {
    std::vector<Diagnostic> diags;
    auto err = [&](const std::string& m) { diags.push_back({true, 0, m}); };
    auto warn = [&](const std::string& m) { diags.push_back({false, 0, m}); };

    std::unordered_set<std::string> names;
    auto unique_name = [&](const std::string& n, const char* what) {
        if (!names.insert(n).second) err(std::string("duplicate name: ") + what + " " + n);
    };
    for (const auto& c : clocks) unique_name(c, "clock");
    for (const auto& v : vars) unique_name(v.name, "var");
    for (const auto& c : channels) unique_name(c.name, "channel");
    for (const auto& a : automata) unique_name(a.name, "automaton");

    for (const auto& v : vars)
        if (v.init < v.lo || v.init > v.hi)
            err("initial value of " + v.name + " outside its domain");

    int nclocks = clock_count();
    int nvars = static_cast<int>(vars.size());
    auto check_clock = [&](int c, const std::string& where) {
        if (c < 0 || c > nclocks) err("clock index out of range in " + where);
    };
    auto check_atoms = [&](const std::vector<AtomicConstraint>& cs, const std::string& where) {
        for (const auto& c : cs) {
            check_clock(c.lhs, where);
            check_clock(c.rhs, where);
            if (c.constant < 0) err("negative constant in " + where);
        }
    };

    for (size_t pi = 0; pi < automata.size(); ++pi) {
        const Automaton& a = automata[pi];
        std::unordered_set<std::string> locnames;
        for (const auto& l : a.locations) {
            if (!locnames.insert(l.name).second)
                err("duplicate location " + l.name + " in " + a.name);
            check_atoms(l.invariant, a.name + "." + l.name);
        }
        if (a.initial < 0 || a.initial >= static_cast<int>(a.locations.size())) {
            err("initial location out of range in " + a.name);
            continue;
        }
        for (size_t ei = 0; ei < a.edges.size(); ++ei) {
            const Edge& e = a.edges[ei];
            std::string where = a.name + " edge " + std::to_string(ei);
            if (e.src < 0 || e.src >= static_cast<int>(a.locations.size()) || e.dst < 0 ||
                e.dst >= static_cast<int>(a.locations.size())) {
                err("location out of range in " + where);
                continue;
            }
            check_atoms(e.clock_guard, where);
            for (int c : e.resets) check_clock(c, where);
            for (const auto& g : e.disc_guard) {
                if (g.var < 0 || g.var >= nvars) err("variable out of range in " + where);
                if (g.rhs_is_var && (g.rhs < 0 || g.rhs >= nvars))
                    err("variable out of range in " + where);
            }
            for (const auto& u : e.updates) {
                if (u.var < 0 || u.var >= nvars) {
                    err("variable out of range in " + where);
                    continue;
                }
                if (u.rhs_is_var) {
                    if (u.rhs < 0 || u.rhs >= nvars) err("variable out of range in " + where);
                } else if (u.rhs < vars[u.var].lo || u.rhs > vars[u.var].hi) {
                    err("assignment " + vars[u.var].name + " := " + std::to_string(u.rhs) +
                        " leaves domain [" + std::to_string(vars[u.var].lo) + "," +
                        std::to_string(vars[u.var].hi) + "]");
                }
            }
            if (e.sync && (e.sync->channel < 0 ||
                           e.sync->channel >= static_cast<int>(channels.size())))
                err("undeclared channel in " + where);
        }

        // Syntactic reachability over the location graph (warning only).
        std::vector<bool> seen(a.locations.size(), false);
        std::vector<int> stack{a.initial};
        seen[a.initial] = true;
        while (!stack.empty()) {
            int l = stack.back();
            stack.pop_back();
            for (const auto& e : a.edges)
                if (e.src == l && !seen[e.dst]) {
                    seen[e.dst] = true;
                    stack.push_back(e.dst);
                }
        }
        for (size_t li = 0; li < a.locations.size(); ++li)
            if (!seen[li])
                warn("location " + a.locations[li].name + " unreachable in " + a.name);
    }

    // Initial invariants must admit the all-zero valuation.
    if (diags.empty()) {
        int dim = nclocks + 1;
        Dbm zero = Dbm::zero(dim);
        for (const auto& a : automata) {
            Dbm inv = Dbm::from_constraints(dim, expand_all(a.locations[a.initial].invariant));
            if (zero.intersect(inv).is_empty())
                err("initial invariant unsatisfiable in " + a.name);
        }
    }
    return diags;
}

}  // namespace tempo
