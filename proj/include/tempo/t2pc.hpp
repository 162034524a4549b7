#pragma once

// Timed two-phase commit: network generator for any participant count, the
// intermediate-deadline arithmetic, the specification suite, and the expected
// verdict table used as a regression oracle.
//
// One coordinator drives k participants; every process owns a dedicated CPU
// fronted by a manager that grants reservation requests. Message timing is
// enforced structurally: the voting phase is capped by V and the decision
// broadcast by DEC (on-time delivery under fair non-preemptive scheduling),
// while completion delivery is left free, so the completion deadline Dp can
// genuinely expire.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tempo/model.hpp"
#include "tempo/model_parser.hpp"

namespace tempo::t2pc {

struct ParamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProtocolParams {
    int D = 80;          // absolute transaction deadline
    int delta = 3;       // bound on a point-to-point send
    int delta_star = 3;  // bound on a broadcast
    int tau_max = 9;     // largest per-participant time need
    int tau_d = 22;      // coordinator decision bound
    int tau_f = 25;      // completion-collection bound
    int exe_time = 52;   // CPU slot length
    std::vector<int> lst;     // reservation window starts; recorded, unused
    std::vector<int> t_need;  // per-participant time needs
};

struct Deadlines {
    int Dp = 0;
    int DEC = 0;
    int V = 0;
};

inline Deadlines derive_deadlines(const ProtocolParams& p) {
    Deadlines d;
    d.Dp = p.D - p.delta - p.tau_f;
    if (d.Dp < 0) throw ParamError("derived deadline Dp is negative");
    d.DEC = d.Dp - p.tau_max - p.delta_star;
    if (d.DEC < 0) throw ParamError("derived deadline DEC is negative");
    d.V = d.DEC - p.delta - p.tau_d;
    if (d.V < 0) throw ParamError("derived deadline V is negative");
    return d;
}

// Parameter file: `key = value` integer lines. Direct Dp/DEC/V overrides
// bypass derive_deadlines.
struct Config {
    ProtocolParams params;
    std::optional<int> Dp, DEC, V;

    Deadlines resolve() const {
        if (Dp && DEC && V) return {*Dp, *DEC, *V};
        Deadlines d = derive_deadlines(params);
        if (Dp) d.Dp = *Dp;
        if (DEC) d.DEC = *DEC;
        if (V) d.V = *V;
        return d;
    }
};

inline Config parse_params(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key, eq;
        long long value = 0;
        if (!(ls >> key) || key.empty() || key[0] == '#') continue;
        if (!(ls >> eq >> value) || eq != "=")
            throw ParamError("expected 'key = value' on line " + std::to_string(lineno));
        if (key == "D")
            c.params.D = static_cast<int>(value);
        else if (key == "delta")
            c.params.delta = static_cast<int>(value);
        else if (key == "delta_star")
            c.params.delta_star = static_cast<int>(value);
        else if (key == "tau_max")
            c.params.tau_max = static_cast<int>(value);
        else if (key == "tau_d")
            c.params.tau_d = static_cast<int>(value);
        else if (key == "tau_f")
            c.params.tau_f = static_cast<int>(value);
        else if (key == "exe_time")
            c.params.exe_time = static_cast<int>(value);
        else if (key == "Dp")
            c.Dp = static_cast<int>(value);
        else if (key == "DEC")
            c.DEC = static_cast<int>(value);
        else if (key == "V")
            c.V = static_cast<int>(value);
        else
            throw ParamError("unknown parameter '" + key + "'");
    }
    return c;
}

// ----------------------------------------------------------------------------
// Network generator.

namespace gen_detail {

struct Builder {
    Network net;

    std::string var(const std::string& base, int idx) {
        return base + "[" + std::to_string(idx) + "]";
    }

    int addvar(const std::string& name, int lo, int hi, int init) {
        net.vars.push_back({name, lo, hi, init});
        return static_cast<int>(net.vars.size()) - 1;
    }

    int addchan(const std::string& name, ChannelKind kind) {
        net.channels.push_back({name, kind});
        return static_cast<int>(net.channels.size()) - 1;
    }

    int vi(const std::string& name) const {
        int i = net.var_index(name);
        if (i < 0) throw ParamError("internal: unknown var " + name);
        return i;
    }
    int chi(const std::string& name) const {
        int i = net.channel_index(name);
        if (i < 0) throw ParamError("internal: unknown channel " + name);
        return i;
    }

    static AtomicConstraint clk(int clock, Rel rel, int c) { return {clock, 0, rel, c}; }
    DiscComparison cmp(const std::string& v, Rel rel, int c) const {
        return {vi(v), rel, false, c};
    }
    Assignment set(const std::string& v, int c) const { return {vi(v), false, c}; }
    Sync snd(const std::string& ch) const { return {chi(ch), Polarity::Send}; }
    Sync rcv(const std::string& ch) const { return {chi(ch), Polarity::Receive}; }
};

}  // namespace gen_detail

// 3(k+1) processes: P1 the coordinator, P2..P(k+1) participants, then one
// CPU and one manager per process. Clocks: x1..x(k+1) for coordinator and
// participants, y1..y(k+1) for the CPUs.
inline Network build_t2pc(int k, const ProtocolParams& p, const Deadlines& d) {
    if (k < 1) throw ParamError("participant count must be at least 1");
    if (!(d.V <= d.DEC && d.DEC <= d.Dp && d.Dp <= p.D))
        throw ParamError("deadlines must satisfy V <= DEC <= Dp <= D");
    gen_detail::Builder b;
    Network& net = b.net;

    for (int i = 1; i <= k + 1; ++i) net.clocks.push_back("x" + std::to_string(i));
    for (int j = 1; j <= k + 1; ++j) net.clocks.push_back("y" + std::to_string(j));
    auto xc = [&](int i) { return i; };
    auto yc = [&](int j) { return k + 1 + j; };

    for (int i = 1; i <= k + 1; ++i) b.addvar(b.var("vote", i), 0, 2, 0);
    for (int i = 1; i <= k + 1; ++i) b.addvar(b.var("decision", i), 0, 2, 0);
    for (int i = 1; i <= k + 1; ++i) b.addvar(b.var("update", i), 0, 1, 0);
    for (int i = 1; i <= k + 1; ++i) b.addvar(b.var("status", i), 0, 1, 0);
    b.addvar("outcome", 1, 2, 1);
    for (int j = 1; j <= k + 1; ++j) b.addvar(b.var("busy", j), 0, 1, 0);
    for (int j = 1; j <= k + 1; ++j) b.addvar(b.var("resource_granted", j), 0, 1, 0);
    for (int j = 1; j <= k + 1; ++j) b.addvar(b.var("wait", j), 0, 1, 0);
    if (k > 1) {
        b.addvar("votes_rcvd", 0, k, 0);
        b.addvar("comps_rcvd", 0, k, 0);
    }

    b.addchan("start", ChannelKind::Broadcast);
    b.addchan("commit", ChannelKind::Broadcast);
    b.addchan("abort", ChannelKind::Broadcast);
    b.addchan("comp", ChannelKind::Binary);
    for (int j = 1; j <= k + 1; ++j) {
        b.addchan("reserve" + std::to_string(j), ChannelKind::Binary);
        b.addchan("ready" + std::to_string(j), ChannelKind::Binary);
        b.addchan("finished" + std::to_string(j), ChannelKind::Binary);
    }
    if (k == 1) {
        b.addchan("yes", ChannelKind::Binary);
        b.addchan("no", ChannelKind::Binary);
    } else {
        for (int i = 1; i <= k; ++i) {
            b.addchan("yes" + std::to_string(i), ChannelKind::Binary);
            b.addchan("no" + std::to_string(i), ChannelKind::Binary);
        }
    }

    auto yes_ch = [&](int i) { return k == 1 ? std::string("yes") : "yes" + std::to_string(i); };
    auto no_ch = [&](int i) { return k == 1 ? std::string("no") : "no" + std::to_string(i); };

    // --- Coordinator (P1) ---
    {
        Automaton a;
        a.name = "P1";
        a.locations = {{"coor_idle", {}},
                       {"coor_begin", {}},
                       {"waitVotes", {b.clk(xc(1), Rel::Lt, d.V)}},
                       {"sendDecision", {b.clk(xc(1), Rel::Lt, d.DEC)}},
                       {"waitCompMsg", {b.clk(xc(1), Rel::Le, p.D)}},
                       {"coor_final", {}},
                       {"coor_fail", {}},
                       {"exception", {}}};
        a.initial = 0;
        auto L = [&](const char* n) { return a.location_index(n); };
        auto add = [&](Edge e) { a.edges.push_back(std::move(e)); };

        add({L("coor_idle"), L("coor_begin"), {}, {}, b.snd("reserve1"), {}, {}});
        for (int v : {1, 2})
            add({L("coor_begin"),
                 L("waitVotes"),
                 {},
                 {b.cmp(b.var("resource_granted", 1), Rel::Eq, 1)},
                 b.snd("start"),
                 {xc(1)},
                 {b.set(b.var("vote", 1), v)}});

        if (k == 1) {
            add({L("waitVotes"),
                 L("sendDecision"),
                 {b.clk(xc(1), Rel::Lt, d.V)},
                 {b.cmp(b.var("vote", 1), Rel::Eq, 2)},
                 b.rcv("yes"),
                 {},
                 {b.set(b.var("decision", 1), 2), b.set("outcome", 2)}});
            add({L("waitVotes"),
                 L("sendDecision"),
                 {b.clk(xc(1), Rel::Lt, d.V)},
                 {b.cmp(b.var("vote", 1), Rel::Eq, 1)},
                 b.rcv("yes"),
                 {},
                 {b.set(b.var("decision", 1), 1), b.set("outcome", 1)}});
            add({L("waitVotes"),
                 L("sendDecision"),
                 {b.clk(xc(1), Rel::Lt, d.V)},
                 {},
                 b.rcv("no"),
                 {},
                 {b.set(b.var("decision", 1), 1), b.set("outcome", 1)}});
        } else {
            for (int i = 1; i <= k; ++i)
                for (int m = 0; m < k; ++m) {
                    add({L("waitVotes"),
                         L("waitVotes"),
                         {b.clk(xc(1), Rel::Lt, d.V)},
                         {b.cmp("votes_rcvd", Rel::Eq, m)},
                         b.rcv(yes_ch(i)),
                         {},
                         {b.set("votes_rcvd", m + 1)}});
                    add({L("waitVotes"),
                         L("waitVotes"),
                         {b.clk(xc(1), Rel::Lt, d.V)},
                         {b.cmp("votes_rcvd", Rel::Eq, m)},
                         b.rcv(no_ch(i)),
                         {},
                         {b.set("votes_rcvd", m + 1), b.set(b.var("vote", 1), 1)}});
                }
            for (int v : {2, 1})
                add({L("waitVotes"),
                     L("sendDecision"),
                     {b.clk(xc(1), Rel::Lt, d.V)},
                     {b.cmp("votes_rcvd", Rel::Eq, k), b.cmp(b.var("vote", 1), Rel::Eq, v)},
                     std::nullopt,
                     {},
                     {b.set(b.var("decision", 1), v), b.set("outcome", v)}});
        }
        add({L("waitVotes"), L("coor_fail"), {b.clk(xc(1), Rel::Ge, d.V)}, {}, {}, {}, {}});

        add({L("sendDecision"),
             L("waitCompMsg"),
             {},
             {b.cmp(b.var("decision", 1), Rel::Eq, 2)},
             b.snd("commit"),
             {},
             {}});
        add({L("sendDecision"),
             L("waitCompMsg"),
             {},
             {b.cmp(b.var("decision", 1), Rel::Eq, 1)},
             b.snd("abort"),
             {},
             {}});

        if (k == 1) {
            add({L("waitCompMsg"),
                 L("coor_final"),
                 {b.clk(xc(1), Rel::Lt, d.Dp)},
                 {},
                 b.rcv("comp"),
                 {},
                 {}});
        } else {
            for (int m = 0; m < k - 1; ++m)
                add({L("waitCompMsg"),
                     L("waitCompMsg"),
                     {b.clk(xc(1), Rel::Lt, d.Dp)},
                     {b.cmp("comps_rcvd", Rel::Eq, m)},
                     b.rcv("comp"),
                     {},
                     {b.set("comps_rcvd", m + 1)}});
            add({L("waitCompMsg"),
                 L("coor_final"),
                 {b.clk(xc(1), Rel::Lt, d.Dp)},
                 {b.cmp("comps_rcvd", Rel::Eq, k - 1)},
                 b.rcv("comp"),
                 {},
                 {b.set("comps_rcvd", k)}});
        }
        add({L("waitCompMsg"), L("coor_fail"), {b.clk(xc(1), Rel::Gt, d.Dp)}, {}, {}, {}, {}});

        add({L("coor_final"),
             L("exception"),
             {b.clk(xc(1), Rel::Lt, p.D)},
             {},
             {},
             {},
             {b.set(b.var("update", 1), 1), b.set(b.var("status", 1), 1)}});
        add({L("coor_final"), L("coor_fail"), {b.clk(xc(1), Rel::Gt, p.D)}, {}, {}, {}, {}});
        add({L("coor_fail"),
             L("exception"),
             {},
             {},
             {},
             {},
             {b.set("outcome", 1), b.set(b.var("status", 1), 1)}});
        net.automata.push_back(std::move(a));
    }

    // --- Participants (P2..P(k+1)) ---
    for (int i = 1; i <= k; ++i) {
        int clock = xc(1 + i);
        Automaton a;
        a.name = "P" + std::to_string(1 + i);
        a.locations = {{"part_idle", {}},
                       {"part_reserve", {b.clk(clock, Rel::Lt, d.V)}},
                       {"part_start", {b.clk(clock, Rel::Lt, d.V)}},
                       {"part_wait", {}},
                       {"sendCompMsg", {}},
                       {"part_final", {}},
                       {"part_fail", {}},
                       {"exception", {}}};
        a.initial = 0;
        auto L = [&](const char* n) { return a.location_index(n); };
        auto add = [&](Edge e) { a.edges.push_back(std::move(e)); };
        std::string rg = b.var("resource_granted", i + 1);
        std::string dec = b.var("decision", 1 + i);

        add({L("part_idle"), L("part_reserve"), {}, {}, b.rcv("start"), {clock}, {}});
        add({L("part_reserve"),
             L("part_start"),
             {},
             {},
             b.snd("reserve" + std::to_string(i + 1)),
             {},
             {}});
        add({L("part_start"),
             L("part_wait"),
             {b.clk(clock, Rel::Lt, d.V)},
             {b.cmp(rg, Rel::Eq, 1)},
             b.snd(yes_ch(i)),
             {},
             {b.set(b.var("vote", 1 + i), 2)}});
        add({L("part_start"),
             L("part_wait"),
             {b.clk(clock, Rel::Lt, d.V)},
             {b.cmp(rg, Rel::Eq, 1)},
             b.snd(no_ch(i)),
             {},
             {b.set(b.var("vote", 1 + i), 1)}});
        add({L("part_start"), L("part_fail"), {b.clk(clock, Rel::Ge, d.V)}, {}, {}, {}, {}});

        add({L("part_wait"),
             L("sendCompMsg"),
             {b.clk(clock, Rel::Lt, d.DEC)},
             {},
             b.rcv("abort"),
             {},
             {b.set(dec, 1)}});
        add({L("part_wait"),
             L("sendCompMsg"),
             {b.clk(clock, Rel::Lt, d.DEC)},
             {},
             b.rcv("commit"),
             {},
             {b.set(dec, 2)}});
        add({L("part_wait"), L("part_fail"), {b.clk(clock, Rel::Ge, d.DEC)}, {}, {}, {}, {}});

        add({L("sendCompMsg"), L("part_final"), {}, {}, b.snd("comp"), {}, {}});
        add({L("sendCompMsg"), L("part_fail"), {b.clk(clock, Rel::Ge, p.D)}, {}, {}, {}, {}});

        add({L("part_final"),
             L("exception"),
             {b.clk(clock, Rel::Lt, p.D)},
             {},
             {},
             {},
             {b.set(b.var("update", 1 + i), 1), b.set(b.var("status", 1 + i), 1)}});
        add({L("part_final"), L("part_fail"), {b.clk(clock, Rel::Gt, p.D)}, {}, {}, {}, {}});
        add({L("part_fail"),
             L("exception"),
             {},
             {},
             {},
             {},
             {b.set(b.var("status", 1 + i), 1)}});
        net.automata.push_back(std::move(a));
    }

    // --- CPUs ---
    for (int j = 1; j <= k + 1; ++j) {
        int clock = yc(j);
        Automaton a;
        a.name = "P" + std::to_string(k + 1 + j);
        a.locations = {{"cpu_idle", {}}, {"cpu_busy", {b.clk(clock, Rel::Le, p.exe_time)}}};
        a.initial = 0;
        a.edges.push_back({0,
                           1,
                           {},
                           {},
                           b.rcv("ready" + std::to_string(j)),
                           {clock},
                           {b.set(b.var("busy", j), 1)}});
        a.edges.push_back({1,
                           0,
                           {b.clk(clock, Rel::Eq, p.exe_time)},
                           {},
                           b.snd("finished" + std::to_string(j)),
                           {},
                           {b.set(b.var("busy", j), 0)}});
        net.automata.push_back(std::move(a));
    }

    // --- Managers ---
    for (int j = 1; j <= k + 1; ++j) {
        Automaton a;
        a.name = "P" + std::to_string(2 * (k + 1) + j);
        a.locations = {{"m_idle", {}}, {"m_req", {}}, {"m_done", {}}};
        a.initial = 0;
        std::string busy = b.var("busy", j);
        std::string waitv = b.var("wait", j);
        std::string granted = b.var("resource_granted", j);
        a.edges.push_back({0, 1, {}, {}, b.rcv("reserve" + std::to_string(j)), {}, {}});
        a.edges.push_back({0, 2, {}, {}, b.rcv("finished" + std::to_string(j)), {}, {}});
        a.edges.push_back({1,
                           0,
                           {},
                           {b.cmp(busy, Rel::Eq, 0)},
                           b.snd("ready" + std::to_string(j)),
                           {},
                           {b.set(granted, 1)}});
        a.edges.push_back(
            {1, 0, {}, {b.cmp(busy, Rel::Eq, 1)}, std::nullopt, {}, {b.set(waitv, 1)}});
        a.edges.push_back({2,
                           0,
                           {},
                           {b.cmp(waitv, Rel::Eq, 1)},
                           b.snd("ready" + std::to_string(j)),
                           {},
                           {b.set(waitv, 0), b.set(granted, 1)}});
        a.edges.push_back({2, 0, {}, {b.cmp(waitv, Rel::Eq, 0)}, std::nullopt, {}, {}});
        net.automata.push_back(std::move(a));
    }

    return net;
}

inline Network build_t2pc(int k, const ProtocolParams& p = {}) {
    return build_t2pc(k, p, derive_deadlines(p));
}

// ----------------------------------------------------------------------------
// Specification library.

enum class SpecId {
    strong_atomicity,
    afag_atomicity,
    s1,
    s2a,
    s2b,
    s3,
    s4,
    s5,
    s6
};

inline const std::vector<SpecId>& all_specs() {
    static const std::vector<SpecId> ids{
        SpecId::strong_atomicity, SpecId::afag_atomicity, SpecId::s1,
        SpecId::s2a,              SpecId::s2b,            SpecId::s3,
        SpecId::s4,               SpecId::s5,             SpecId::s6};
    return ids;
}

inline const char* spec_name(SpecId id) {
    switch (id) {
        case SpecId::strong_atomicity: return "strong_atomicity";
        case SpecId::afag_atomicity: return "afag_atomicity";
        case SpecId::s1: return "s1";
        case SpecId::s2a: return "s2a";
        case SpecId::s2b: return "s2b";
        case SpecId::s3: return "s3";
        case SpecId::s4: return "s4";
        case SpecId::s5: return "s5";
        case SpecId::s6: return "s6";
    }
    return "?";
}

inline std::optional<SpecId> spec_by_name(const std::string& name) {
    for (SpecId id : all_specs())
        if (name == spec_name(id)) return id;
    return std::nullopt;
}

namespace spec_detail {

inline std::string decisions_equal(int k) {
    std::string s;
    for (int i = 1; i <= k + 1; ++i)
        for (int j = i + 1; j <= k + 1; ++j) {
            if (!s.empty()) s += " and ";
            s += "decision[" + std::to_string(i) + "] == decision[" + std::to_string(j) + "]";
        }
    return "(" + s + ")";
}

}  // namespace spec_detail

// Query text for one specification over the generated network's names.
inline std::string spec_formula(SpecId id, int k, const Deadlines& d, int D) {
    using std::to_string;
    switch (id) {
        case SpecId::strong_atomicity:
            return "AG " + spec_detail::decisions_equal(k);
        case SpecId::afag_atomicity:
            return "AF AG " + spec_detail::decisions_equal(k);
        case SpecId::s1: {
            // One abort-committed pair suffices to violate weak atomicity.
            std::string s;
            for (int i = 1; i <= k + 1; ++i)
                for (int j = i + 1; j <= k + 1; ++j) {
                    if (!s.empty()) s += " or ";
                    s += "(decision[" + to_string(i) + "] == 1 and decision[" + to_string(j) +
                         "] == 2)";
                    s += " or (decision[" + to_string(i) + "] == 2 and decision[" +
                         to_string(j) + "] == 1)";
                }
            return "AG not (" + s + ")";
        }
        case SpecId::s2a: {
            std::string any_no;
            for (int i = 1; i <= k + 1; ++i) {
                if (!any_no.empty()) any_no += " or ";
                any_no += "vote[" + to_string(i) + "] == 1";
            }
            return "AG ((" + any_no + ") imply AF (outcome == 1))";
        }
        case SpecId::s2b: {
            std::string all_yes;
            for (int i = 1; i <= k + 1; ++i) {
                if (!all_yes.empty()) all_yes += " and ";
                all_yes += "vote[" + to_string(i) + "] == 2";
            }
            return "AG ((" + all_yes + ") imply AF (outcome == 2))";
        }
        case SpecId::s3:
            return "AG (P1@waitVotes imply AF{<=" + to_string(d.V) + "} P1@sendDecision)";
        case SpecId::s4: {
            std::string s;
            for (int i = 2; i <= k + 1; ++i) {
                if (!s.empty()) s += " and ";
                s += "(part_wait[" + to_string(i) + "] => AF{<=" + to_string(d.DEC) +
                     "} sendCompMsg[" + to_string(i) + "])";
            }
            return "AG (" + s + ")";
        }
        case SpecId::s5:
            return "AG (P1@waitCompMsg imply AF{<=" + to_string(d.Dp) +
                   "} (P1@coor_final or x1 >= " + to_string(d.Dp) + "))";
        case SpecId::s6: {
            std::string s;
            for (int i = 1; i <= k + 1; ++i) {
                if (!s.empty()) s += " and ";
                s += "(x" + to_string(i) + " == " + to_string(D) + " imply status[" +
                     to_string(i) + "] == 1)";
            }
            return "AF (" + s + ")";
        }
    }
    throw ParamError("unknown spec id");
}

// The always-form reading of the termination property; reported alongside
// the eventually-form the tools use (it fails: a process may sit at a fail
// location with its status still unset when the deadline instant passes).
inline std::string s6_always_variant(int k, int D) {
    std::string s;
    for (int i = 1; i <= k + 1; ++i) {
        if (!s.empty()) s += " and ";
        s += "(x" + std::to_string(i) + " == " + std::to_string(D) + " imply status[" +
             std::to_string(i) + "] == 1)";
    }
    return "AG (" + s + ")";
}

// The verification outcome each specification must reproduce.
inline std::vector<std::pair<SpecId, bool>> expected_verdicts() {
    return {{SpecId::strong_atomicity, false},
            {SpecId::afag_atomicity, false},
            {SpecId::s1, true},
            {SpecId::s2a, true},
            {SpecId::s2b, false},
            {SpecId::s3, true},
            {SpecId::s4, true},
            {SpecId::s5, true},
            {SpecId::s6, true}};
}

}  // namespace tempo::t2pc
