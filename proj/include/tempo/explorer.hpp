#pragma once

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <limits>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tempo/federation.hpp"
#include "tempo/model.hpp"

namespace tempo {

struct MemoryLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// (location vector, discrete valuation, zone): one node of the zone graph.
struct SymbolicState {
    LocationVector locs;
    DiscValues disc;
    Dbm zone;
};

inline SymbolicState initial_state(const Network& net) {
    int dim = net.clock_count() + 1;
    LocationVector locs = net.initial_locations();
    Dbm inv = net.invariant_zone(locs, dim);
    Dbm zone = Dbm::zero(dim).intersect(inv);
    if (zone.is_empty()) throw ModelError("initial invariant unsatisfiable");
    zone = zone.up().intersect(inv);
    return {locs, net.initial_values(), zone};
}

// Action-then-delay successor for one joint transition; empty result when
// the guard misses the zone or an update leaves its domain.
inline std::optional<SymbolicState> successor(const Network& net, const SymbolicState& s,
                                              const JointTransition& t) {
    Dbm g = s.zone.constrained(net.joint_guard(t));
    if (g.is_empty()) return std::nullopt;
    auto disc = net.apply_updates(t, s.disc);
    if (!disc) return std::nullopt;
    LocationVector locs = net.apply_locations(t, s.locs);
    for (int c : net.joint_resets(t)) g = g.reset(c);
    Dbm inv = net.invariant_zone(locs, s.zone.dim());
    g = g.intersect(inv);
    if (g.is_empty()) return std::nullopt;
    g = g.up().intersect(inv);
    return SymbolicState{std::move(locs), std::move(*disc), std::move(g)};
}

inline std::vector<std::pair<JointTransition, SymbolicState>> successors(
    const Network& net, const SymbolicState& s) {
    std::vector<std::pair<JointTransition, SymbolicState>> out;
    for (const auto& t : net.enabled_edges(s.locs, s.disc))
        if (auto nxt = successor(net, s, t)) out.emplace_back(t, std::move(*nxt));
    return out;
}

struct ExploreStats {
    uint64_t states_explored = 0;
    uint64_t zones_stored = 0;
    double wall_ms = 0;
};

enum class Status { Valid, Invalid, Unknown };

inline const char* status_text(Status s) {
    switch (s) {
        case Status::Valid: return "valid";
        case Status::Invalid: return "invalid";
        case Status::Unknown: return "unknown";
    }
    return "?";
}

// Concrete trace: alternating delays and joint transitions from the initial
// configuration. Delays are exact rationals stored at a fixed binary scale.
inline constexpr int64_t kTraceScale = 4096;

struct TraceStep {
    int64_t delay = 0;  // in 1/kTraceScale units
    std::optional<JointTransition> joint;
};

struct Trace {
    std::vector<TraceStep> steps;
    LocationVector final_locs;
    DiscValues final_disc;

    std::string to_text(const Network& net) const;
    static std::optional<Trace> from_text(const Network& net, const std::string& text,
                                          std::string* error);
};

struct Verdict {
    Status status = Status::Unknown;
    std::optional<Trace> witness;
    ExploreStats stats;
};

// ----------------------------------------------------------------------------
// Zone graph with inclusion subsumption and k-extrapolation.

struct ConfigKey {
    LocationVector locs;
    DiscValues disc;
    bool operator==(const ConfigKey& o) const { return locs == o.locs && disc == o.disc; }
};

struct ConfigKeyHash {
    size_t operator()(const ConfigKey& k) const {
        size_t h = 0x811c9dc5;
        for (int v : k.locs) h = (h ^ static_cast<size_t>(v)) * 16777619u;
        for (int v : k.disc) h = (h ^ static_cast<size_t>(v + 7)) * 16777619u;
        return h;
    }
};

class ZoneGraph {
public:
    struct Edge {
        JointTransition joint;
        int target = 0;
    };
    struct RevEdge {
        JointTransition joint;
        int source = 0;
    };
    struct Node {
        int cid = 0;
        Dbm zone;
        int parent = -1;  // node index
        JointTransition via;
    };

    ZoneGraph(const Network& net, std::vector<int> max_consts)
        : net_(&net), dim_(net.clock_count() + 1), maxk_(std::move(max_consts)),
          activity_(net) {
        if (const char* env = std::getenv("TEMPO_MEM_LIMIT_MB"))
            mem_limit_bytes_ = std::strtoull(env, nullptr, 10) * 1024ull * 1024ull;
    }

    void set_memory_limit_mb(uint64_t mb) { mem_limit_bytes_ = mb * 1024ull * 1024ull; }

    // Keep every non-duplicate zone instead of discarding included ones;
    // exploration still terminates (finitely many abstracted zones) and any
    // verdict must be unchanged, which the tests exercise.
    void disable_subsumption() { subsumption_ = false; }

    const Network& net() const { return *net_; }
    int dim() const { return dim_; }
    const std::vector<int>& max_consts() const { return maxk_; }
    int config_count() const { return static_cast<int>(configs_.size()); }
    const ConfigKey& config(int cid) const { return configs_[cid]; }
    const Federation& stored(int cid) const { return stored_[cid]; }
    const Dbm& invariant(int cid) const { return inv_[cid]; }
    const std::vector<Edge>& out_edges(int cid) const { return edges_[cid]; }
    const std::vector<RevEdge>& in_edges(int cid) const { return redges_[cid]; }
    const std::vector<JointTransition>& joints(int cid) const { return joints_[cid]; }
    int initial_config() const { return 0; }
    const Dbm& initial_zone() const { return init_zone_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    ExploreStats stats() const {
        ExploreStats s = stats_;
        s.wall_ms = elapsed_ms();
        return s;
    }

    // Explores the whole reachable zone graph, or stops early at the first
    // node whose zone meets `target` (returning that node id).
    std::optional<int> explore(
        const std::function<Federation(int cid)>* target = nullptr) {
        start_ = std::chrono::steady_clock::now();
        SymbolicState init = initial_state(*net_);
        init_zone_ = init.zone;
        int cid0 = intern(init.locs, init.disc);
        Dbm z0 = abstracted(init.zone, init.locs);
        store(cid0, z0);
        nodes_.push_back({cid0, z0, -1, {}});
        if (target && hits(cid0, z0, *target)) return 0;
        std::deque<int> queue{0};
        while (!queue.empty()) {
            int nid = queue.front();
            queue.pop_front();
            Node node = nodes_[nid];
            ++stats_.states_explored;
            const auto& ts = joints_[node.cid];
            for (const auto& t : ts) {
                SymbolicState src{configs_[node.cid].locs, configs_[node.cid].disc, node.zone};
                auto nxt = successor(*net_, src, t);
                if (!nxt) continue;
                int tcid = intern(nxt->locs, nxt->disc);
                note_edge(node.cid, t, tcid);
                Dbm zx = abstracted(nxt->zone, nxt->locs);
                if (subsumption_ ? stored_[tcid].any_member_includes(zx)
                                 : seen_before(tcid, zx))
                    continue;
                store(tcid, zx);
                nodes_.push_back({tcid, zx, nid, t});
                int new_id = static_cast<int>(nodes_.size()) - 1;
                if (target && hits(tcid, zx, *target)) return new_id;
                queue.push_back(new_id);
            }
        }
        return std::nullopt;
    }

    // Storage abstraction: release clocks no future step can read, then
    // apply k-extrapolation.
    Dbm abstracted(const Dbm& zone, const LocationVector& locs) const {
        Dbm z = zone;
        for (int c : activity_.inactive(locs)) z = z.freed(c);
        return z.extrapolated(maxk_);
    }

    // Config path (with joints) from the initial node to a node.
    std::vector<std::pair<JointTransition, int>> path_to(int nid) const {
        std::vector<std::pair<JointTransition, int>> rev;
        for (int n = nid; nodes_[n].parent >= 0; n = nodes_[n].parent)
            rev.emplace_back(nodes_[n].via, nodes_[n].cid);
        std::reverse(rev.begin(), rev.end());
        return rev;
    }

    int intern(const LocationVector& locs, const DiscValues& disc) {
        ConfigKey key{locs, disc};
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int cid = static_cast<int>(configs_.size());
        index_.emplace(key, cid);
        configs_.push_back(key);
        stored_.emplace_back(dim_);
        inv_.push_back(net_->invariant_zone(locs, dim_));
        edges_.emplace_back();
        redges_.emplace_back();
        joints_.push_back(net_->enabled_edges(locs, disc));
        return cid;
    }

private:
    bool hits(int cid, const Dbm& zone, const std::function<Federation(int)>& target) const {
        Federation t = target(cid);
        return !t.intersect_zone(zone).is_empty();
    }

    void store(int cid, const Dbm& zone) {
        stored_[cid].insert(zone);
        ++stats_.zones_stored;
        zone_bytes_ += static_cast<uint64_t>(dim_) * dim_ * sizeof(bound_t) + 64;
        if (mem_limit_bytes_ && zone_bytes_ > mem_limit_bytes_)
            throw MemoryLimitError("out of memory");
    }

    bool seen_before(int cid, const Dbm& z) {
        auto& zones = seen_exact_[cid];
        for (const Dbm& m : zones)
            if (m == z) return true;
        zones.push_back(z);
        return false;
    }

    void note_edge(int src, const JointTransition& t, int dst) {
        for (const auto& e : edges_[src])
            if (e.target == dst && e.joint == t) return;
        edges_[src].push_back({t, dst});
        redges_[dst].push_back({t, src});
    }

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

    const Network* net_;
    int dim_;
    std::vector<int> maxk_;
    ClockActivity activity_;
    std::vector<ConfigKey> configs_;
    std::unordered_map<ConfigKey, int, ConfigKeyHash> index_;
    std::vector<Federation> stored_;
    std::vector<Dbm> inv_;
    std::vector<std::vector<Edge>> edges_;
    std::vector<std::vector<RevEdge>> redges_;
    std::vector<std::vector<JointTransition>> joints_;
    std::vector<Node> nodes_;
    Dbm init_zone_{1};
    ExploreStats stats_;
    bool subsumption_ = true;
    std::unordered_map<int, std::vector<Dbm>> seen_exact_;
    uint64_t zone_bytes_ = 0;
    uint64_t mem_limit_bytes_ = 0;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ----------------------------------------------------------------------------
// Backward predecessor operators.

// Zone part of the action predecessor: states that satisfy guard and source
// invariant and whose reset image lies in `target`.
inline Federation pre_action(const Network& net, const JointTransition& t,
                             const Federation& target, const Dbm& src_inv) {
    std::vector<int> resets = net.joint_resets(t);
    Federation f = target;
    for (int c : resets) {
        std::vector<DiffConstraint> zero{{c, 0, kLeZero}, {0, c, kLeZero}};
        f = f.constrained(zero);
        f = f.freed(c);
    }
    f = f.constrained(net.joint_guard(t));
    return f.intersect_zone(src_inv);
}

inline Federation pre_time(const Federation& f, const Dbm& inv) {
    return f.down().intersect_zone(inv);
}

// ----------------------------------------------------------------------------
// Forward reachability with a shortest-in-transitions concrete witness.

namespace trace_detail {

// Minimal delay (in `scale` units) taking `v` into `z` along the time flow;
// nullopt when the flow line misses the zone.
inline std::optional<int64_t> min_delay_into(const std::vector<int64_t>& v, const Dbm& z,
                                             int64_t scale) {
    if (z.is_empty()) return std::nullopt;
    int dim = z.dim();
    int64_t lo = 0;
    int64_t hi = std::numeric_limits<int64_t>::max() / 4;
    auto val = [&](int i) -> int64_t { return i == 0 ? 0 : v[i - 1]; };
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            if (i == j) continue;
            bound_t b = z(i, j);
            if (b == kBoundInf) continue;
            int64_t lim = scale * bound_constant(b);
            bool weak = bound_is_weak(b);
            if (i >= 1 && j >= 1) {
                int64_t diff = val(i) - val(j);
                if (weak ? diff > lim : diff >= lim) return std::nullopt;
            } else if (i >= 1) {  // v_i + d <= lim
                int64_t cap = lim - val(i) - (weak ? 0 : 1);
                hi = std::min(hi, cap);
            } else {  // -v_j - d <= lim
                int64_t floor = -lim - val(j) + (weak ? 0 : 1);
                lo = std::max(lo, floor);
            }
        }
    if (lo > hi) return std::nullopt;
    return lo;
}

}  // namespace trace_detail

// Builds a concrete trace along a symbolic config path. `target` is the
// federation the final state must delay into (already intersected with the
// final exact zone). Returns nullopt only if no dyadic-rational realization
// up to scale 2^12 exists, which the pruning below rules out.
inline std::optional<Trace> concretize_path(
    const Network& net, const std::vector<std::pair<JointTransition, int>>& path,
    const std::vector<Federation>& pruned, const Federation& final_target) {
    int dim = net.clock_count() + 1;
    for (int64_t scale = 2; scale <= kTraceScale; scale *= 2) {
        Trace trace;
        std::vector<int64_t> v(dim - 1, 0);
        LocationVector locs = net.initial_locations();
        DiscValues disc = net.initial_values();
        bool ok = true;
        for (size_t step = 0; step < path.size() && ok; ++step) {
            // Delay into the pre-action region, then fire.
            std::optional<int64_t> best;
            for (const Dbm& z : pruned[step].zones())
                if (auto d = trace_detail::min_delay_into(v, z, scale))
                    best = best ? std::min(*best, *d) : *d;
            if (!best) {
                ok = false;
                break;
            }
            for (auto& c : v) c += *best;
            const JointTransition& t = path[step].first;
            auto upd = net.apply_updates(t, disc);
            if (!upd) {
                ok = false;
                break;
            }
            for (int c : net.joint_resets(t)) v[c - 1] = 0;
            disc = *upd;
            locs = net.apply_locations(t, locs);
            trace.steps.push_back({*best * (kTraceScale / scale), t});
        }
        if (!ok) continue;
        std::optional<int64_t> last;
        for (const Dbm& z : final_target.zones())
            if (auto d = trace_detail::min_delay_into(v, z, scale))
                last = last ? std::min(*last, *d) : *d;
        if (!last) continue;
        if (*last > 0) trace.steps.push_back({*last * (kTraceScale / scale), std::nullopt});
        trace.final_locs = locs;
        trace.final_disc = disc;
        return trace;
    }
    return std::nullopt;
}

// target: cid -> federation of error states at that config (model dim).
inline Verdict forward_reach(const Network& net, const std::vector<int>& max_consts,
                             const std::function<Federation(int, ZoneGraph&)>& target,
                             uint64_t mem_limit_mb = 0) {
    ZoneGraph g(net, max_consts);
    if (mem_limit_mb) g.set_memory_limit_mb(mem_limit_mb);
    std::function<Federation(int)> t = [&](int cid) { return target(cid, g); };
    auto hit = g.explore(&t);
    Verdict v;
    v.stats = g.stats();
    if (!hit) {
        v.status = Status::Valid;
        return v;
    }
    v.status = Status::Invalid;

    // Exact zones along the found config path, then backward pruning so the
    // concretization can never dead-end.
    auto path = g.path_to(*hit);
    int n = static_cast<int>(path.size());
    std::vector<Dbm> exact;
    exact.reserve(n + 1);
    exact.push_back(g.initial_zone());
    for (int i = 0; i < n; ++i) {
        SymbolicState s{i == 0 ? net.initial_locations() : g.config(path[i - 1].second).locs,
                        i == 0 ? net.initial_values() : g.config(path[i - 1].second).disc,
                        exact.back()};
        auto nxt = successor(net, s, path[i].first);
        if (!nxt) return v;  // extrapolation artifact; report status only
        exact.push_back(nxt->zone);
    }
    Federation fin = target(path.empty() ? g.initial_config() : path.back().second, g)
                         .intersect_zone(exact.back());
    if (fin.is_empty()) return v;

    // pruned[i]: fire-time region of the i-th joint from which the rest of
    // the suffix stays realizable; concretization delays into it, fires, and
    // can never dead-end.
    std::vector<Federation> pruned(n, Federation(net.clock_count() + 1));
    Federation after = fin.down().intersect_zone(exact.back());
    for (int i = n - 1; i >= 0; --i) {
        const Dbm src_inv =
            i == 0 ? net.invariant_zone(net.initial_locations(), net.clock_count() + 1)
                   : g.invariant(path[i - 1].second);
        Federation pre =
            pre_action(net, path[i].first, after, src_inv).intersect_zone(exact[i]);
        pruned[i] = pre;
        after = pre.down().intersect_zone(exact[i]);
    }
    v.witness = concretize_path(net, path, pruned, fin);
    return v;
}

// Least fixpoint of time-and-action predecessors of the error set, evaluated
// within the forward-closed symbolic universe; status only.
inline Verdict backward_reach(const Network& net, const std::vector<int>& max_consts,
                              const std::function<Federation(int, ZoneGraph&)>& target,
                              uint64_t mem_limit_mb = 0) {
    ZoneGraph g(net, max_consts);
    if (mem_limit_mb) g.set_memory_limit_mb(mem_limit_mb);
    g.explore();
    int n = g.config_count();
    std::vector<Federation> back(n, Federation(g.dim()));
    std::deque<int> queue;
    std::vector<bool> queued(n, false);
    auto enqueue = [&](int cid) {
        if (!queued[cid]) {
            queued[cid] = true;
            queue.push_back(cid);
        }
    };
    for (int cid = 0; cid < n; ++cid) {
        Federation t = target(cid, g).intersect(g.stored(cid));
        if (!t.is_empty()) {
            back[cid] = t;
            enqueue(cid);
        }
    }
    while (!queue.empty()) {
        int cid = queue.front();
        queue.pop_front();
        queued[cid] = false;
        Federation widened = pre_time(back[cid], g.invariant(cid)).intersect(g.stored(cid));
        if (back[cid].merge(widened)) enqueue(cid);
        for (const auto& re : g.in_edges(cid)) {
            Federation pre = pre_action(net, re.joint, back[cid], g.invariant(re.source))
                                 .intersect(g.stored(re.source));
            pre = pre_time(pre, g.invariant(re.source)).intersect(g.stored(re.source));
            if (back[re.source].merge(pre)) enqueue(re.source);
        }
    }
    Verdict v;
    v.stats = g.stats();
    Federation init_hit =
        back[g.initial_config()].intersect_zone(g.initial_zone());
    v.status = init_hit.is_empty() ? Status::Valid : Status::Invalid;
    return v;
}

// ----------------------------------------------------------------------------
// Trace text form: `delay <d>` / `fire <proc:edge>[,...]` lines terminated by
// `state <locs> <disc>`.

inline std::string format_delay(int64_t units) {
    int64_t whole = units / kTraceScale;
    int64_t frac = units % kTraceScale;
    if (frac == 0) return std::to_string(whole);
    std::string digits;
    while (frac != 0) {
        frac *= 10;
        digits += static_cast<char>('0' + frac / kTraceScale);
        frac %= kTraceScale;
    }
    return std::to_string(whole) + "." + digits;
}

inline std::optional<int64_t> parse_delay(const std::string& s) {
    size_t dot = s.find('.');
    try {
        int64_t whole = std::stoll(dot == std::string::npos ? s : s.substr(0, dot));
        int64_t units = whole * kTraceScale;
        if (dot != std::string::npos) {
            std::string frac = s.substr(dot + 1);
            int64_t num = 0, den = 1;
            for (char c : frac) {
                if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
                num = num * 10 + (c - '0');
                den *= 10;
            }
            if ((num * kTraceScale) % den != 0) return std::nullopt;
            units += num * kTraceScale / den;
        }
        return units;
    } catch (...) {
        return std::nullopt;
    }
}

inline std::string Trace::to_text(const Network& net) const {
    std::ostringstream os;
    for (const auto& s : steps) {
        os << "delay " << format_delay(s.delay) << "\n";
        if (s.joint) os << "fire " << net.joint_to_string(*s.joint) << "\n";
    }
    os << "state ";
    for (size_t p = 0; p < final_locs.size(); ++p)
        os << (p ? "," : "") << net.automata[p].locations[final_locs[p]].name;
    for (size_t i = 0; i < final_disc.size(); ++i)
        os << (i ? "," : " ") << net.vars[i].name << "=" << final_disc[i];
    os << "\n";
    return os.str();
}

inline std::optional<Trace> Trace::from_text(const Network& net, const std::string& text,
                                             std::string* error) {
    auto fail = [&](const std::string& m) {
        if (error) *error = m;
        return std::nullopt;
    };
    Trace tr;
    std::istringstream in(text);
    std::string line;
    std::optional<int64_t> pending_delay;
    bool got_state = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw == "delay") {
            if (pending_delay) tr.steps.push_back({*pending_delay, std::nullopt});
            std::string d;
            ls >> d;
            auto units = parse_delay(d);
            if (!units || *units < 0) return fail("bad delay '" + d + "'");
            pending_delay = *units;
        } else if (kw == "fire") {
            std::string spec;
            ls >> spec;
            JointTransition t;
            std::istringstream ps(spec);
            std::string part;
            while (std::getline(ps, part, ',')) {
                size_t colon = part.find(':');
                if (colon == std::string::npos) return fail("bad fire entry '" + part + "'");
                int proc = std::stoi(part.substr(0, colon));
                int edge = std::stoi(part.substr(colon + 1));
                if (proc < 0 || proc >= net.process_count() || edge < 0 ||
                    edge >= static_cast<int>(net.automata[proc].edges.size()))
                    return fail("fire entry out of range '" + part + "'");
                t.parts.emplace_back(proc, edge);
            }
            tr.steps.push_back({pending_delay.value_or(0), t});
            pending_delay = std::nullopt;
        } else if (kw == "state") {
            if (pending_delay) {
                tr.steps.push_back({*pending_delay, std::nullopt});
                pending_delay = std::nullopt;
            }
            std::string locs, disc;
            ls >> locs >> disc;
            std::istringstream lls(locs);
            std::string name;
            while (std::getline(lls, name, ',')) {
                int p = static_cast<int>(tr.final_locs.size());
                if (p >= net.process_count()) return fail("too many locations in state line");
                int li = net.automata[p].location_index(name);
                if (li < 0) return fail("unknown location '" + name + "'");
                tr.final_locs.push_back(li);
            }
            if (static_cast<int>(tr.final_locs.size()) != net.process_count())
                return fail("wrong number of locations in state line");
            tr.final_disc.assign(net.vars.size(), 0);
            std::istringstream ds(disc);
            std::string kv;
            while (std::getline(ds, kv, ',')) {
                size_t eq = kv.find('=');
                if (eq == std::string::npos) return fail("bad assignment '" + kv + "'");
                int vi = net.var_index(kv.substr(0, eq));
                if (vi < 0) return fail("unknown variable '" + kv.substr(0, eq) + "'");
                tr.final_disc[vi] = std::stoi(kv.substr(eq + 1));
            }
            got_state = true;
        } else {
            return fail("unknown trace line '" + kw + "'");
        }
    }
    if (!got_state) return fail("missing state line");
    return tr;
}

struct ReplayResult {
    bool ok = true;
    int failing_step = -1;  // index into steps, or steps-count for the state line
    std::string message;
};

// Checks that a trace is a legal execution: guards, invariants, sync shape,
// updates, and the final configuration all hold.
inline ReplayResult replay(const Network& net, const Trace& trace) {
    auto fail = [&](int step, const std::string& m) { return ReplayResult{false, step, m}; };
    int dim = net.clock_count() + 1;
    std::vector<int64_t> v(net.clock_count(), 0);
    LocationVector locs = net.initial_locations();
    DiscValues disc = net.initial_values();
    Dbm inv = net.invariant_zone(locs, dim);
    if (!inv.contains(v, kTraceScale)) return fail(0, "initial invariant violated");
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const TraceStep& s = trace.steps[i];
        int step = static_cast<int>(i);
        for (auto& c : v) c += s.delay;
        if (!inv.contains(v, kTraceScale)) return fail(step, "invariant violated during delay");
        if (!s.joint) continue;
        const JointTransition& t = *s.joint;
        // The joint must be one the network offers at this discrete config.
        bool listed = false;
        for (const auto& cand : net.enabled_edges(locs, disc))
            if (cand == t) listed = true;
        if (!listed) return fail(step, "transition not enabled (sync or discrete guard)");
        Dbm guard = Dbm::universe(dim).constrained(net.joint_guard(t));
        if (!guard.contains(v, kTraceScale)) return fail(step, "clock guard violated");
        auto nd = net.apply_updates(t, disc);
        if (!nd) return fail(step, "update leaves variable domain");
        disc = *nd;
        locs = net.apply_locations(t, locs);
        for (int c : net.joint_resets(t)) v[c - 1] = 0;
        inv = net.invariant_zone(locs, dim);
        if (!inv.contains(v, kTraceScale)) return fail(step, "target invariant violated");
    }
    int last = static_cast<int>(trace.steps.size());
    if (locs != trace.final_locs) return fail(last, "final locations do not match");
    if (disc != trace.final_disc) return fail(last, "final discrete values do not match");
    return {};
}

}  // namespace tempo
