// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Run through ctest or directly; exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "../ctl_oracle.hpp"
#include "../oracle.hpp"
#include "tempo/model_parser.hpp"
#include "tempo/t2pc.hpp"
#include "tempo/tctl.hpp"

using namespace tempo;

namespace {

int failures = 0;

struct Criterion {
    std::string name;
    double budget_s = 0;  // 0: no explicit budget
    std::vector<std::string> problems;

    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }

    void run(const std::function<void(Criterion&)>& body) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            body(*this);
        } catch (const std::exception& e) {
            problems.push_back(std::string("exception: ") + e.what());
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (budget_s > 0 && secs > budget_s)
            problems.push_back("exceeded time budget (" + std::to_string(secs) + " s of " +
                               std::to_string(budget_s) + " s)");
        if (problems.empty()) {
            std::printf("PASS %-28s (%.1f s)\n", name.c_str(), secs);
        } else {
            ++failures;
            std::printf("FAIL %-28s (%.1f s)\n", name.c_str(), secs);
            for (const auto& p : problems) std::printf("     - %s\n", p.c_str());
        }
        std::fflush(stdout);
    }
};

// ---------------------------------------------------------------------------
// 1. DBM operations against the half-integer lattice oracle.

void dbm_oracle_equivalence(Criterion& c) {
    std::mt19937 rng(0xD00D);
    int cases_per_op = 1000;
    int bad = 0;
    for (int i = 0; i < cases_per_op && bad < 5; ++i) {
        int clocks = 1 + i % 3;
        oracle::Grid g = oracle::make_grid(clocks, 4);
        int dim = clocks + 1;

        // canonicalize: the closure represents exactly the raw constraint set.
        std::vector<DiffConstraint> cs;
        {
            std::uniform_int_distribution<int> n_cs(0, 5), idx(0, clocks), cst(-4, 4),
                coin(0, 1);
            int n = n_cs(rng);
            for (int j = 0; j < n; ++j) {
                int a = idx(rng), b = idx(rng);
                if (a == b) continue;
                int k = cst(rng);
                if (a == 0 && k < 0) k = -k;
                cs.push_back({a, b, make_bound(k, coin(rng) == 1)});
            }
        }
        Dbm z = Dbm::from_constraints(dim, cs);
        auto raw_member = [&](const oracle::Point& p) {
            for (const auto& dc : cs)
                if (!oracle::satisfies(p, dc)) return false;
            return true;
        };
        oracle::PointSet raw = oracle::collect(g, raw_member);
        oracle::PointSet canon = oracle::points_of(z, g);
        if (raw != canon || z.canonicalize() != z) {
            c.expect(false, "canonicalize mismatch at case " + std::to_string(i));
            ++bad;
            continue;
        }
        if (z.is_empty()) continue;

        if (oracle::points_of(z.up(), g) != oracle::up(z, g)) {
            c.expect(false, "up mismatch at case " + std::to_string(i));
            ++bad;
        }
        if (oracle::points_of(z.down(), g) != oracle::down(z, g)) {
            c.expect(false, "down mismatch at case " + std::to_string(i));
            ++bad;
        }
        int clk = 1 + i % clocks;
        if (oracle::points_of(z.reset(clk), g) != oracle::reset(z, clk, g)) {
            c.expect(false, "reset mismatch at case " + std::to_string(i));
            ++bad;
        }
        if (oracle::points_of(z.freed(clk), g) != oracle::free_clock(z, clk, g)) {
            c.expect(false, "free mismatch at case " + std::to_string(i));
            ++bad;
        }

        std::vector<DiffConstraint> atoms;
        {
            std::uniform_int_distribution<int> idx(0, clocks), cst(-4, 4), coin(0, 1);
            int a = idx(rng), b = idx(rng);
            if (a != b) {
                int k = cst(rng);
                if (a == 0 && k < 0) k = -k;
                atoms.push_back({a, b, make_bound(k, coin(rng) == 1)});
            }
        }
        if (oracle::points_of(z.constrained(atoms), g) != oracle::constrain(z, atoms, g)) {
            c.expect(false, "constrain mismatch at case " + std::to_string(i));
            ++bad;
        }

        Dbm w = oracle::random_dbm(rng, clocks, 4);
        bool incl = oracle::subset_extended(
            g, [&](const oracle::Point& p) { return z.contains(p); },
            [&](const oracle::Point& p) { return w.contains(p); });
        if (w.includes(z) != incl) {
            c.expect(false, "includes mismatch at case " + std::to_string(i));
            ++bad;
        }

        Federation fa = Federation::from(z);
        fa.insert(oracle::random_dbm(rng, clocks, 4));
        Federation fb = Federation::from(w);
        fb.insert(oracle::random_dbm(rng, clocks, 4));
        oracle::PointSet diff =
            oracle::set_minus(oracle::points_of(fa, g), oracle::points_of(fb, g));
        if (oracle::points_of(fed_subtract(fa, fb), g) != diff) {
            c.expect(false, "fed_subtract mismatch at case " + std::to_string(i));
            ++bad;
        }
    }
}

// ---------------------------------------------------------------------------
// 2. Verdict regression for the bundled protocol at k = 1.

void verdict_regression(Criterion& c) {
    t2pc::ProtocolParams p;
    t2pc::Deadlines d = t2pc::derive_deadlines(p);
    c.expect(d.Dp == 52 && d.DEC == 40 && d.V == 15, "shipped constants are off");
    Network net = t2pc::build_t2pc(1, p, d);
    for (auto [id, expect_valid] : t2pc::expected_verdicts()) {
        Verdict v = check(net, t2pc::spec_formula(id, 1, d, p.D));
        bool valid = v.status == Status::Valid;
        if (valid != expect_valid)
            c.expect(false, std::string(t2pc::spec_name(id)) + " expected " +
                                (expect_valid ? "valid" : "invalid") + ", got " +
                                status_text(v.status));
    }
}

// ---------------------------------------------------------------------------
// 3. Shape of the specification-2(b) counterexample.

void example1_counterexample(Criterion& c) {
    t2pc::ProtocolParams p;
    t2pc::Deadlines d = t2pc::derive_deadlines(p);
    Network net = t2pc::build_t2pc(1, p, d);
    Verdict v = check(net, t2pc::spec_formula(t2pc::SpecId::s2b, 1, d, p.D));
    c.expect(v.status == Status::Invalid, "spec 2(b) should fail");
    if (!v.witness) {
        c.expect(false, "no witness trace attached");
        return;
    }
    ReplayResult rr = replay(net, *v.witness);
    c.expect(rr.ok, "witness does not replay: " + rr.message);

    const Trace& tr = *v.witness;
    c.expect(tr.final_disc[net.var_index("vote[1]")] == 2, "coordinator vote is not yes");
    c.expect(tr.final_disc[net.var_index("vote[2]")] == 2, "participant vote is not yes");
    c.expect(tr.final_disc[net.var_index("outcome")] == 1, "final outcome is not abort");

    bool commit_broadcast = false, dp_expiry = false;
    int commit_ch = net.channel_index("commit");
    for (const auto& st : tr.steps) {
        if (!st.joint) continue;
        for (auto [proc, ei] : st.joint->parts) {
            const Edge& e = net.automata[proc].edges[ei];
            if (e.sync && e.sync->channel == commit_ch && e.sync->polarity == Polarity::Send)
                commit_broadcast = true;
            if (proc == 0 &&
                net.automata[0].locations[e.src].name == "waitCompMsg" &&
                net.automata[0].locations[e.dst].name == "coor_fail")
                dp_expiry = true;
        }
    }
    c.expect(commit_broadcast, "no decision broadcast on the witness");
    c.expect(dp_expiry, "completion-deadline expiry transition missing");
}

// ---------------------------------------------------------------------------
// 4. Forward and backward reachability agree.

std::string random_net_text(std::mt19937& rng) {
    std::uniform_int_distribution<int> locs(2, 3), consts(0, 4), coin(0, 1), rel(0, 4);
    const char* rels[] = {"<", "<=", "==", ">", ">="};
    std::ostringstream os;
    os << "clocks c0 c1\n";
    os << "vars\n  v 0..1 = 0\n";
    os << "channels\n  ch binary\n";
    for (int p = 0; p < 2; ++p) {
        os << "automaton P" << p << "\n";
        int n = locs(rng);
        for (int l = 0; l < n; ++l) {
            os << "  loc l" << l;
            if (coin(rng) && l > 0) os << " [c" << p << " <= " << 2 + consts(rng) << "]";
            os << "\n";
        }
        os << "  init l0\n";
        int edges = locs(rng);
        for (int e = 0; e < edges; ++e) {
            int src = std::uniform_int_distribution<int>(0, n - 1)(rng);
            int dst = std::uniform_int_distribution<int>(0, n - 1)(rng);
            os << "  edge l" << src << " -> l" << dst;
            if (coin(rng)) os << " guard c" << p << " " << rels[rel(rng)] << " " << consts(rng);
            if (coin(rng)) os << " sync ch" << (p == 0 ? "!" : "?");
            if (coin(rng)) os << " reset c" << p;
            if (coin(rng)) os << " do v := " << coin(rng);
            os << "\n";
        }
    }
    return os.str();
}

void direction_agreement(Criterion& c) {
    // The protocol, both sizes, over its reachability-reducible queries.
    t2pc::ProtocolParams p;
    t2pc::Deadlines d = t2pc::derive_deadlines(p);
    for (int k = 1; k <= 2; ++k) {
        Network net = t2pc::build_t2pc(k, p, d);
        std::vector<std::string> queries{
            t2pc::spec_formula(t2pc::SpecId::strong_atomicity, k, d, p.D),
            t2pc::spec_formula(t2pc::SpecId::s1, k, d, p.D),
            "EF P1@coor_fail",
            "EF P1@exception",
            "AG not (outcome == 2)",
            "EF (x1 >= 52)",
            "EF part_fail[2]",
            "AG not sendCompMsg[2]",
        };
        for (const auto& q : queries) {
            Verdict f = check(net, q, {CheckEngine::Forward, 0, false});
            Verdict b = check(net, q, {CheckEngine::Backward, 0, false});
            if (f.status != b.status)
                c.expect(false, "t2pc k=" + std::to_string(k) + " disagreement on " + q);
        }
    }

    // Twenty random two-process networks, every location probed.
    std::mt19937 rng(0xACCE97);
    int tried = 0;
    while (tried < 20) {
        auto r = parse_model(random_net_text(rng));
        if (!r.ok()) continue;
        ++tried;
        const Network& net = *r.network;
        for (int pi = 0; pi < net.process_count(); ++pi)
            for (const auto& loc : net.automata[pi].locations) {
                std::string q = "EF " + net.automata[pi].name + "@" + loc.name;
                Verdict f = check(net, q, {CheckEngine::Forward, 0, false});
                Verdict b = check(net, q, {CheckEngine::Backward, 0, false});
                if (f.status != b.status)
                    c.expect(false, "random net " + std::to_string(tried) +
                                        " disagreement on " + q);
            }
    }
}

// ---------------------------------------------------------------------------
// 5. The full suite completes at sizes 6, 9, 12 with monotone state counts.

void scaling(Criterion& c) {
    t2pc::ProtocolParams p;
    t2pc::Deadlines d = t2pc::derive_deadlines(p);
    std::vector<std::vector<uint64_t>> states_per_k;
    for (int k = 1; k <= 3; ++k) {
        Network net = t2pc::build_t2pc(k, p, d);
        c.expect(net.process_count() == 3 * (k + 1),
                 "unexpected process count at k=" + std::to_string(k));
        std::vector<int> consts = model_max_constants(net);
        std::vector<std::pair<t2pc::SpecId, TctlPtr>> formulas;
        for (t2pc::SpecId id : t2pc::all_specs()) {
            auto f = parse_query(net, t2pc::spec_formula(id, k, d, p.D));
            query_max_constants(*f, consts);
            formulas.emplace_back(id, f);
        }
        TctlChecker checker(net, consts);
        std::vector<uint64_t> states;
        for (auto& [id, f] : formulas) {
            auto sat = checker.eval(*f);
            Verdict v = checker.verdict_of(sat);
            bool expect_valid = false;
            for (auto [sid, val] : t2pc::expected_verdicts())
                if (sid == id) expect_valid = val;
            if (k == 1 && (v.status == Status::Valid) != expect_valid)
                c.expect(false, std::string("k=1 verdict drift on ") + t2pc::spec_name(id));
            states.push_back(v.stats.states_explored);
        }
        states_per_k.push_back(states);
    }
    for (size_t s = 0; s < states_per_k[0].size(); ++s) {
        bool monotone = states_per_k[0][s] <= states_per_k[1][s] &&
                        states_per_k[1][s] <= states_per_k[2][s];
        c.expect(monotone, std::string("state count not monotone for ") +
                               t2pc::spec_name(t2pc::all_specs()[s]));
    }
}

// ---------------------------------------------------------------------------
// 6. Untimed models against the explicit-state CTL oracle.

std::string random_untimed_net(std::mt19937& rng) {
    std::uniform_int_distribution<int> locs(2, 4), coin(0, 1), val(0, 1);
    std::ostringstream os;
    os << "vars\n  v 0..1 = 0\n  w 0..1 = 0\n";
    os << "channels\n  ch binary\n  bc broadcast\n";
    for (int p = 0; p < 2; ++p) {
        int n = locs(rng);
        os << "automaton P" << p << "\n";
        for (int l = 0; l < n; ++l) os << "  loc l" << l << "\n";
        os << "  init l0\n";
        int edges = 1 + locs(rng);
        for (int e = 0; e < edges; ++e) {
            int src = std::uniform_int_distribution<int>(0, n - 1)(rng);
            int dst = std::uniform_int_distribution<int>(0, n - 1)(rng);
            os << "  edge l" << src << " -> l" << dst;
            if (coin(rng)) os << " guard " << (coin(rng) ? "v" : "w") << " == " << val(rng);
            if (coin(rng)) os << " sync " << (coin(rng) ? "ch" : "bc") << (p == 0 ? "!" : "?");
            if (coin(rng)) os << " do " << (coin(rng) ? "v" : "w") << " := " << val(rng);
            os << "\n";
        }
    }
    return os.str();
}

std::string random_formula(std::mt19937& rng, const Network& net, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 2);
    std::uniform_int_distribution<int> coin(0, 1), val(0, 1);
    switch (pick(rng)) {
        case 0: return std::string(coin(rng) ? "v" : "w") + " == " + std::to_string(val(rng));
        case 1: {
            int p = coin(rng);
            const auto& a = net.automata[p];
            int l = std::uniform_int_distribution<int>(
                0, static_cast<int>(a.locations.size()) - 1)(rng);
            return a.name + "@" + a.locations[l].name;
        }
        case 2: return coin(rng) ? "true" : "false";
        case 3: return "not (" + random_formula(rng, net, depth - 1) + ")";
        case 4:
            return "(" + random_formula(rng, net, depth - 1) + " and " +
                   random_formula(rng, net, depth - 1) + ")";
        case 5:
            return "(" + random_formula(rng, net, depth - 1) + " or " +
                   random_formula(rng, net, depth - 1) + ")";
        case 6: return "EF (" + random_formula(rng, net, depth - 1) + ")";
        case 7: return "AG (" + random_formula(rng, net, depth - 1) + ")";
        case 8:
            return "E[" + random_formula(rng, net, depth - 1) + " U " +
                   random_formula(rng, net, depth - 1) + "]";
        default:
            return "A[" + random_formula(rng, net, depth - 1) + " U " +
                   random_formula(rng, net, depth - 1) + "]";
    }
}

void untimed_ctl_oracle(Criterion& c) {
    std::mt19937 rng(0xCA71);
    int nets = 0;
    while (nets < 20) {
        auto r = parse_model(random_untimed_net(rng));
        if (!r.ok()) continue;
        const Network& net = *r.network;
        ctl_oracle::Graph g = ctl_oracle::build(net);
        if (g.locs.size() > 200) continue;
        ++nets;
        for (int i = 0; i < 50; ++i) {
            std::string q = random_formula(rng, net, 3);
            auto f = parse_query(net, q);
            bool oracle = ctl_oracle::eval(g, net, *f)[0];
            Verdict v = check(net, *f, {CheckEngine::Tctl, 0, false});
            if ((v.status == Status::Valid) != oracle) {
                c.expect(false, "net " + std::to_string(nets) + " query " + q);
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 7. Deadline arithmetic across every admissible split.

void deadline_arithmetic(Criterion& c) {
    // Splits satisfying delta + tau_f = 28, tau_max + delta_star = 12,
    // delta + tau_d = 25 must all reproduce Dp = 52, DEC = 40, V = 15.
    int cases = 0;
    for (int delta = 0; delta <= 25; ++delta)
        for (int tau_max = 0; tau_max <= 12; ++tau_max) {
            t2pc::ProtocolParams p;
            p.D = 80;
            p.delta = delta;
            p.tau_f = 28 - delta;
            p.tau_max = tau_max;
            p.delta_star = 12 - tau_max;
            p.tau_d = 25 - delta;
            t2pc::Deadlines d = t2pc::derive_deadlines(p);
            if (d.Dp != 52 || d.DEC != 40 || d.V != 15) {
                c.expect(false, "split delta=" + std::to_string(delta) +
                                    " tau_max=" + std::to_string(tau_max) + " gives " +
                                    std::to_string(d.Dp) + "/" + std::to_string(d.DEC) + "/" +
                                    std::to_string(d.V));
                return;
            }
            ++cases;
        }
    c.expect(cases == 26 * 13, "unexpected number of splits");
}

}  // namespace

int main() {
    Criterion{"dbm-oracle-equivalence", 60}.run(dbm_oracle_equivalence);
    Criterion{"verdict-regression", 60}.run(verdict_regression);
    Criterion{"example1-counterexample", 0}.run(example1_counterexample);
    Criterion{"forward-backward-agreement", 0}.run(direction_agreement);
    Criterion{"scaling-suite", 600}.run(scaling);
    Criterion{"untimed-ctl-oracle", 0}.run(untimed_ctl_oracle);
    Criterion{"deadline-arithmetic", 0}.run(deadline_arithmetic);
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
