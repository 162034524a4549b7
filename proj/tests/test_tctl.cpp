#include "tempo/tctl.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "ctl_oracle.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "tempo/model_parser.hpp"

using namespace tempo;

namespace {

Network parse_ok(const char* text) {
    auto r = parse_model(text);
    REQUIRE(r.ok());
    return *r.network;
}

const char* kFiveModel = R"(
clocks x
automaton A
  loc wait [x <= 5]
  loc goal
  init wait
  edge wait -> goal guard x == 5
)";

const char* kResponse = R"(
clocks x
vars
  req 0..1 = 0
  done 0..1 = 0
automaton A
  loc idle
  loc work [x <= 3]
  loc stop
  init idle
  edge idle -> work guard x >= 1 do req := 1 reset x
  edge work -> stop do done := 1
)";

// `stop` is a dead end: a run that drifts there violates the response.
const char* kBranching = R"(
clocks x
vars
  req 0..1 = 0
  done 0..1 = 0
automaton A
  loc idle
  loc work
  loc stop
  loc fine
  init idle
  edge idle -> work do req := 1
  edge work -> fine do done := 1
  edge work -> stop
)";

}  // namespace

TEST_CASE("parse_query: shapes from the protocol suite") {
    Network net = parse_ok(R"(
clocks x1 x2
vars
  decision[1] 0..2 = 0
  decision[2] 0..2 = 0
automaton P1
  loc waitVotes
  loc sendDecision
  loc fail
  init waitVotes
  edge waitVotes -> sendDecision
automaton P2
  loc part_wait
  loc sendCompMsg
  init part_wait
  edge part_wait -> sendCompMsg
)");

    auto f1 = parse_query(net, "AG not (P1@fail)");
    CHECK(f1->kind == TctlFormula::AG);
    CHECK(f1->a->kind == TctlFormula::Not);
    CHECK(f1->a->a->kind == TctlFormula::AtLoc);

    auto f2 = parse_query(net, "AG (P1@waitVotes imply AF{<=15} P1@sendDecision)");
    CHECK(f2->kind == TctlFormula::AG);
    CHECK(f2->a->kind == TctlFormula::Imply);
    REQUIRE(f2->a->b->kind == TctlFormula::AF);
    CHECK(f2->a->b->bound == 15);

    auto f3 = parse_query(net, "AF AG (decision[1] == decision[2])");
    CHECK(f3->kind == TctlFormula::AF);
    CHECK(f3->a->kind == TctlFormula::AG);
    CHECK(f3->a->a->kind == TctlFormula::VarCmp);
    CHECK(f3->a->a->cmp.rhs_is_var);

    // Bracket-indexed location sugar and => both parse.
    auto f4 = parse_query(net, "AG (part_wait[2] => AF{<=40} sendCompMsg[2])");
    CHECK(f4->a->a->kind == TctlFormula::AtLoc);
    CHECK(f4->a->a->proc == 1);

    CHECK_THROWS_AS(parse_query(net, "AG (P9@nowhere)"), QueryError);
    CHECK_THROWS_AS(parse_query(net, "AG (decision[1] == )"), QueryError);
}

TEST_CASE("AG true holds on any model") {
    Network net = parse_ok(kFiveModel);
    CHECK(check(net, "AG true").status == Status::Valid);
    CHECK(check(net, "AG true", {CheckEngine::Tctl}).status == Status::Valid);
}

TEST_CASE("bounded eventually on the single-path model") {
    Network net = parse_ok(kFiveModel);
    CHECK(check(net, "AF{<=5} A@goal", {CheckEngine::Tctl}).status == Status::Valid);
    CHECK(check(net, "AF{<=4} A@goal", {CheckEngine::Tctl}).status == Status::Invalid);
    CHECK(check(net, "EF{<=5} A@goal", {CheckEngine::Tctl}).status == Status::Valid);
    CHECK(check(net, "EF{<=4} A@goal", {CheckEngine::Tctl}).status == Status::Invalid);
}

TEST_CASE("bounded eventually at a state already satisfying the target") {
    Network net = parse_ok(kFiveModel);
    CHECK(check(net, "AF{<=0} A@wait", {CheckEngine::Tctl}).status == Status::Valid);
}

TEST_CASE("double negation yields the same satisfaction set") {
    Network net = parse_ok(kResponse);
    TctlChecker checker(net, model_max_constants(net));
    auto f = parse_query(net, "EF (done == 1)");
    auto nn = TctlFormula::make(TctlFormula::Not, TctlFormula::make(TctlFormula::Not, f));
    auto s1 = checker.eval(*f);
    auto s2 = checker.eval(*nn);
    REQUIRE(s1.size() == s2.size());
    for (size_t c = 0; c < s1.size(); ++c) CHECK(s1[c].same_set(s2[c]));
}

TEST_CASE("AG agrees between the fixpoint engine and forward reachability") {
    Network net = parse_ok(kResponse);
    for (const char* q : {"AG (req == 0 or done == 0)", "AG not A@stop", "AG (x <= 3)",
                          "AG (req == 0)", "AG (done == 0 imply x <= 100)"}) {
        Verdict tc = check(net, q, {CheckEngine::Tctl});
        Verdict fw = check(net, q, {CheckEngine::Forward});
        Verdict bw = check(net, q, {CheckEngine::Backward});
        CHECK(tc.status == fw.status);
        CHECK(tc.status == bw.status);
    }
}

TEST_CASE("response is forced when an invariant caps the waiting location") {
    Network net = parse_ok(kResponse);
    // work must be left within 3 time units and its only exit sets done.
    CHECK(check(net, "AG (req == 1 imply AF (done == 1))", {CheckEngine::Tctl}).status ==
          Status::Valid);
    // A run may idle at `idle` forever, so req == 1 is never forced; the
    // violating run has no finite maximal form, so no witness is attached.
    Verdict v = check(net, "AG (req == 0 imply AF (req == 1))", {CheckEngine::Tctl});
    CHECK(v.status == Status::Invalid);
    CHECK(!v.witness);
}

TEST_CASE("response witness: prefix to the violation, suffix to a dead end") {
    Network net = parse_ok(kBranching);
    Verdict v = check(net, "AG (req == 1 imply AF (done == 1))", {CheckEngine::Tctl});
    CHECK(v.status == Status::Invalid);
    REQUIRE(v.witness);
    auto rr = replay(net, *v.witness);
    INFO(rr.message);
    CHECK(rr.ok);
    // The witness parks at the dead end with the response still unmet.
    CHECK(net.automata[0].locations[v.witness->final_locs[0]].name == "stop");
    CHECK(v.witness->final_disc[net.var_index("done")] == 0);
}

namespace {

std::string random_untimed_net(std::mt19937& rng) {
    std::uniform_int_distribution<int> locs(2, 3), coin(0, 1), val(0, 1);
    std::ostringstream os;
    os << "vars\n  v 0..1 = 0\n  w 0..1 = 0\n";
    os << "channels\n  ch binary\n";
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
            if (coin(rng)) os << " sync ch" << (p == 0 ? "!" : "?");
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

}  // namespace

TEST_CASE("the bundled crossing example verifies as documented") {
    std::ifstream in(std::string(TEMPO_SOURCE_DIR) + "/docs/examples/train-gate.model");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    auto r = parse_model(ss.str());
    REQUIRE(r.ok());
    const Network& net = *r.network;
    CHECK(check(net, "AG (Train@in imply Gate@closed)").status == Status::Valid);
    CHECK(check(net, "AG (Gate@closing imply AF{<=1} Gate@closed)").status == Status::Valid);
    CHECK(check(net, "EF Train@in").status == Status::Valid);
    // Tightening the announcement below the closing time breaks safety.
    std::string rushed = ss.str();
    size_t pos = rushed.find("x >= 3");
    REQUIRE(pos != std::string::npos);
    rushed.replace(pos, 6, "x >= 0");
    auto r2 = parse_model(rushed);
    REQUIRE(r2.ok());
    Verdict v = check(*r2.network, "AG (Train@in imply Gate@closed)");
    CHECK(v.status == Status::Invalid);
    REQUIRE(v.witness);
    CHECK(replay(*r2.network, *v.witness).ok);
}

TEST_CASE("a capped location with no exits ends maximal runs") {
    // The invariant stops time at 2 and there is no transition: every
    // maximal run slides to the boundary and ends there.
    Network net = parse_ok(R"(
clocks x
automaton A
  loc a [x <= 2]
  init a
)");
    CHECK(check(net, "EG (x < 3)", {CheckEngine::Tctl}).status == Status::Valid);
    CHECK(check(net, "EG (x <= 2)", {CheckEngine::Tctl}).status == Status::Valid);
    // The boundary point itself is part of every run, so a strict bound at
    // the cap cannot hold globally.
    CHECK(check(net, "EG (x < 2)", {CheckEngine::Tctl}).status == Status::Invalid);
    // And the run cannot stop early: the cap is always reached.
    CHECK(check(net, "AF (x >= 2)", {CheckEngine::Tctl}).status == Status::Valid);
    CHECK(check(net, "AF (x > 2)", {CheckEngine::Tctl}).status == Status::Invalid);
}

TEST_CASE("timed until: the side condition constrains earlier positions") {
    Network net = parse_ok(R"(
clocks x
automaton A
  loc a [x <= 10]
  loc b
  init a
  edge a -> b guard x >= 2
)");
    // b can be entered at x in [2,3], so a run can keep x <= 3 beforehand.
    CHECK(check(net, "E[x <= 3 U A@b]", {CheckEngine::Tctl}).status == Status::Valid);
    // Entering needs x >= 2, and positions in (1,2) satisfy neither side.
    CHECK(check(net, "E[x <= 1 U A@b]", {CheckEngine::Tctl}).status == Status::Invalid);
    // Every maximal run is forced into b by the invariant, but some enter
    // later than 5.
    CHECK(check(net, "A[x <= 10 U A@b]", {CheckEngine::Tctl}).status == Status::Valid);
    CHECK(check(net, "A[x <= 5 U A@b]", {CheckEngine::Tctl}).status == Status::Invalid);
}

TEST_CASE("parser survives malformed input with diagnostics, not crashes") {
    const char* cases[] = {
        "clocks x\nautomaton A\n  loc a\n  init a\n  edge a -> b\n",
        "vars\n  v 0..2\n",
        "channels\n  c wrong\n",
        "bogus line\n",
        "automaton\n",
        "clocks x\nautomaton A\n  loc a [x <= -1]\n  init a\n",
        "clocks x\nautomaton A\n  loc a\n  init nowhere\n",
        "clocks x y x\nautomaton A\n  loc a\n  init a\n",
    };
    for (const char* text : cases) {
        auto r = parse_model(text);
        CHECK(!r.ok());
        CHECK(!r.diagnostics.empty());
    }
}

TEST_CASE("time_pred_within agrees with a trajectory oracle") {
    // Oracle: v can flow into z while every earlier position stays in w.
    // Membership along a flow line from a quarter-unit point changes only at
    // quarter-unit delays, so eighth-unit sampling of positions is exact.
    std::mt19937 rng(5150);
    oracle::Grid g = oracle::make_grid(2, 3);
    auto random_fed = [&](int zones) {
        Federation f(3);
        for (int i = 0; i < zones; ++i) f.insert(oracle::random_dbm(rng, 2, 3));
        return f;
    };
    int meaningful = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Federation w = random_fed(3);
        Federation z = random_fed(2).intersect(w);
        if (z.is_empty()) continue;
        ++meaningful;
        Federation got = time_pred_within(z, w);
        auto expected = oracle::collect(g, [&](const oracle::Point& p) {
            oracle::Point base = p;
            for (auto& c : base) c *= 4;  // eighth units
            int64_t horizon = 8ll * g.wit_hu;
            for (int64_t d = 0; d <= horizon; ++d) {
                oracle::Point q = base;
                for (auto& c : q) c += d;
                if (!z.contains(q, 8)) continue;
                bool inside = true;
                for (int64_t e = 0; e < d && inside; ++e) {
                    oracle::Point m = base;
                    for (auto& c : m) c += e;
                    if (!w.contains(m, 8)) inside = false;
                }
                if (inside) return true;
            }
            return false;
        });
        CAPTURE(trial);
        CAPTURE(w.to_string());
        CAPTURE(z.to_string());
        CHECK(oracle::points_of(got, g) == expected);
    }
    CHECK(meaningful >= 30);
}

TEST_CASE("untimed models: engine agrees with the explicit-state oracle") {
    std::mt19937 rng(77);
    int nets_tried = 0, formulas = 0;
    while (nets_tried < 6) {
        auto r = parse_model(random_untimed_net(rng));
        if (!r.ok()) continue;
        ++nets_tried;
        const Network& net = *r.network;
        for (int i = 0; i < 10; ++i) {
            std::string q = random_formula(rng, net, 3);
            auto f = parse_query(net, q);
            bool oracle = ctl_oracle::holds_initially(net, *f);
            Verdict v = check(net, *f, {CheckEngine::Tctl, 0, false});
            INFO("net#" << nets_tried << " query: " << q);
            CHECK((v.status == Status::Valid) == oracle);
            ++formulas;
        }
    }
    CHECK(formulas == 60);
}
