#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tempo/explorer.hpp"
#include "tempo/model.hpp"

namespace tempo {

struct QueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ----------------------------------------------------------------------------
// Query AST. Temporal sugar (EF/AF/AG/EG) is kept so the checker can pick
// specialized engines and witness strategies; EU/AU carry the optional {<=c}
// subscript handled through the auxiliary specification clock.

struct TctlFormula;
using TctlPtr = std::shared_ptr<const TctlFormula>;

struct TctlFormula {
    enum Kind {
        True_,
        False_,
        AtLoc,    // process at location
        VarCmp,   // discrete comparison
        ClockCmp, // clock constraint, possibly a difference
        Not,
        And,
        Or,
        Imply,
        EU,
        AU,
        EF,
        AF,
        EG,
        AG
    } kind = True_;

    int proc = -1;
    int loc = -1;
    DiscComparison cmp;
    AtomicConstraint clock;
    std::optional<int> bound;  // {<= c} on EU/AU/EF/AF
    TctlPtr a, b;

    static TctlPtr make(Kind k, TctlPtr a = nullptr, TctlPtr b = nullptr) {
        auto f = std::make_shared<TctlFormula>();
        f->kind = k;
        f->a = std::move(a);
        f->b = std::move(b);
        return f;
    }

    bool temporal_free() const {
        switch (kind) {
            case True_:
            case False_:
            case AtLoc:
            case VarCmp:
            case ClockCmp: return true;
            case Not: return a->temporal_free();
            case And:
            case Or:
            case Imply: return a->temporal_free() && b->temporal_free();
            default: return false;
        }
    }
};

// ----------------------------------------------------------------------------
// Query parser.

namespace qdetail {

struct QTok {
    enum Kind { Ident, Number, Symbol, End } kind = End;
    std::string text;
    int number = 0;
};

class QLexer {
public:
    explicit QLexer(std::string s) : s_(std::move(s)) { advance(); }

    const QTok& peek() const { return tok_; }
    QTok take() {
        QTok t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ >= s_.size()) {
            tok_ = {QTok::End, "", 0};
            return;
        }
        char c = s_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            if (pos_ < s_.size() && s_[pos_] == '[') {
                size_t save = pos_++;
                bool digits = false;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                    ++pos_;
                    digits = true;
                }
                if (digits && pos_ < s_.size() && s_[pos_] == ']')
                    ++pos_;
                else
                    pos_ = save;
            }
            tok_ = {QTok::Ident, s_.substr(start, pos_ - start), 0};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string t = s_.substr(start, pos_ - start);
            tok_ = {QTok::Number, t, std::stoi(t)};
            return;
        }
        static const char* two[] = {"==", "<=", ">=", "=>", "&&", "||"};
        for (const char* t : two)
            if (s_.compare(pos_, 2, t) == 0) {
                pos_ += 2;
                tok_ = {QTok::Symbol, t, 0};
                return;
            }
        ++pos_;
        tok_ = {QTok::Symbol, std::string(1, c), 0};
    }

    std::string s_;
    size_t pos_ = 0;
    QTok tok_;
};

}  // namespace qdetail

class QueryParser {
public:
    explicit QueryParser(const Network& net) : net_(net) {}

    TctlPtr parse(const std::string& text) {
        lex_ = std::make_unique<qdetail::QLexer>(text);
        TctlPtr f = imply();
        if (lex_->peek().kind != qdetail::QTok::End)
            throw QueryError("unexpected trailing input '" + lex_->peek().text + "'");
        return f;
    }

private:
    using K = TctlFormula::Kind;

    TctlPtr imply() {
        TctlPtr lhs = disj();
        const auto& t = lex_->peek();
        if (t.text == "imply" || t.text == "=>") {
            lex_->take();
            return TctlFormula::make(K::Imply, lhs, imply());
        }
        return lhs;
    }

    TctlPtr disj() {
        TctlPtr lhs = conj();
        while (lex_->peek().text == "or" || lex_->peek().text == "||") {
            lex_->take();
            lhs = TctlFormula::make(K::Or, lhs, conj());
        }
        return lhs;
    }

    TctlPtr conj() {
        TctlPtr lhs = unary();
        while (lex_->peek().text == "and" || lex_->peek().text == "&&") {
            lex_->take();
            lhs = TctlFormula::make(K::And, lhs, unary());
        }
        return lhs;
    }

    std::optional<int> optional_bound() {
        if (lex_->peek().text != "{") return std::nullopt;
        lex_->take();
        if (lex_->take().text != "<=") throw QueryError("expected '<=' in bound");
        qdetail::QTok n = lex_->take();
        if (n.kind != qdetail::QTok::Number) throw QueryError("expected a constant bound");
        if (lex_->take().text != "}") throw QueryError("expected '}' after bound");
        return n.number;
    }

    TctlPtr unary() {
        const auto& t = lex_->peek();
        if (t.text == "not" || t.text == "!") {
            lex_->take();
            return TctlFormula::make(K::Not, unary());
        }
        if (t.text == "AG" || t.text == "AF" || t.text == "EF" || t.text == "EG") {
            std::string op = lex_->take().text;
            auto bound = optional_bound();
            if (bound && (op == "AG" || op == "EG"))
                throw QueryError("bounds are only supported on eventually/until forms");
            auto f = std::make_shared<TctlFormula>();
            f->kind = op == "AG" ? K::AG : op == "AF" ? K::AF : op == "EF" ? K::EF : K::EG;
            f->bound = bound;
            f->a = unary();
            return f;
        }
        if ((t.text == "A" || t.text == "E") && t.kind == qdetail::QTok::Ident) {
            qdetail::QTok q_tok = lex_->take();
            std::string q = q_tok.text;
            if (lex_->peek().text != "[") return atom_from(q_tok);
            lex_->take();
            TctlPtr lhs = imply();
            if (lex_->take().text != "U") throw QueryError("expected 'U' in until");
            auto bound = optional_bound();
            TctlPtr rhs = imply();
            if (lex_->take().text != "]") throw QueryError("expected ']' closing until");
            auto f = std::make_shared<TctlFormula>();
            f->kind = q == "A" ? K::AU : K::EU;
            f->bound = bound;
            f->a = lhs;
            f->b = rhs;
            return f;
        }
        if (t.text == "(") {
            lex_->take();
            TctlPtr f = imply();
            if (lex_->take().text != ")") throw QueryError("expected ')'");
            return f;
        }
        return atom();
    }

    static std::optional<Rel> rel_of(const std::string& s) {
        if (s == "<") return Rel::Lt;
        if (s == "<=") return Rel::Le;
        if (s == "==" || s == "=") return Rel::Eq;
        if (s == ">") return Rel::Gt;
        if (s == ">=") return Rel::Ge;
        return std::nullopt;
    }

    TctlPtr atom() { return atom_from(lex_->take()); }

    TctlPtr atom_from(qdetail::QTok t) {
        if (t.kind != qdetail::QTok::Ident)
            throw QueryError("expected an atom, found '" + t.text + "'");
        if (t.text == "true") return TctlFormula::make(K::True_);
        if (t.text == "false") return TctlFormula::make(K::False_);

        // proc@loc
        if (lex_->peek().text == "@") {
            lex_->take();
            qdetail::QTok loc = lex_->take();
            int p = net_.process_index(t.text);
            if (p < 0) throw QueryError("undeclared process '" + t.text + "'");
            int li = loc.kind == qdetail::QTok::Ident
                         ? net_.automata[p].location_index(loc.text)
                         : -1;
            if (li < 0) throw QueryError("undeclared location '" + loc.text + "'");
            auto f = std::make_shared<TctlFormula>();
            f->kind = K::AtLoc;
            f->proc = p;
            f->loc = li;
            return f;
        }

        int vi = net_.var_index(t.text);
        int ci = net_.clock_index(t.text);
        if (vi < 0 && ci < 0) {
            // loc[idx]: location name indexed by 1-based process number.
            size_t br = t.text.find('[');
            if (br != std::string::npos) {
                std::string base = t.text.substr(0, br);
                int pnum = std::stoi(t.text.substr(br + 1, t.text.size() - br - 2));
                if (pnum >= 1 && pnum <= net_.process_count()) {
                    int li = net_.automata[pnum - 1].location_index(base);
                    if (li >= 0) {
                        auto f = std::make_shared<TctlFormula>();
                        f->kind = K::AtLoc;
                        f->proc = pnum - 1;
                        f->loc = li;
                        return f;
                    }
                }
            }
            throw QueryError("undeclared name '" + t.text + "'");
        }

        if (vi >= 0) {
            auto rel = rel_of(lex_->take().text);
            if (!rel) throw QueryError("expected a comparison after '" + t.text + "'");
            qdetail::QTok rhs = lex_->take();
            auto f = std::make_shared<TctlFormula>();
            f->kind = K::VarCmp;
            f->cmp.var = vi;
            f->cmp.rel = *rel;
            if (rhs.kind == qdetail::QTok::Number) {
                f->cmp.rhs = rhs.number;
            } else if (rhs.kind == qdetail::QTok::Ident && net_.var_index(rhs.text) >= 0) {
                f->cmp.rhs_is_var = true;
                f->cmp.rhs = net_.var_index(rhs.text);
            } else {
                throw QueryError("expected constant or variable after comparison");
            }
            return f;
        }

        // Clock atom: x rel c or x - y rel c.
        int rhs_clock = 0;
        if (lex_->peek().text == "-") {
            lex_->take();
            qdetail::QTok y = lex_->take();
            rhs_clock = y.kind == qdetail::QTok::Ident ? net_.clock_index(y.text) : -1;
            if (rhs_clock < 1) throw QueryError("undeclared clock '" + y.text + "'");
        }
        auto rel = rel_of(lex_->take().text);
        if (!rel) throw QueryError("expected a comparison after clock");
        qdetail::QTok c = lex_->take();
        if (c.kind != qdetail::QTok::Number || c.number < 0)
            throw QueryError("clock comparisons use natural constants");
        auto f = std::make_shared<TctlFormula>();
        f->kind = K::ClockCmp;
        f->clock = {ci, rhs_clock, *rel, c.number};
        return f;
    }

    const Network& net_;
    std::unique_ptr<qdetail::QLexer> lex_;
};

inline TctlPtr parse_query(const Network& net, const std::string& text) {
    return QueryParser(net).parse(text);
}

// Per-clock constants the query compares against, for extrapolation.
inline void query_max_constants(const TctlFormula& f, std::vector<int>& k) {
    if (f.kind == TctlFormula::ClockCmp) {
        if (f.clock.lhs >= 1)
            k[f.clock.lhs - 1] = std::max(k[f.clock.lhs - 1], f.clock.constant);
        if (f.clock.rhs >= 1)
            k[f.clock.rhs - 1] = std::max(k[f.clock.rhs - 1], f.clock.constant);
    }
    if (f.a) query_max_constants(*f.a, k);
    if (f.b) query_max_constants(*f.b, k);
}

inline std::vector<int> max_constants(const Network& net, const TctlFormula& query) {
    std::vector<int> k = model_max_constants(net);
    query_max_constants(query, k);
    return k;
}

// ----------------------------------------------------------------------------
// Temporal-free state predicates evaluated per configuration (used for
// reachability targets and satisfaction-set atoms).

inline Federation eval_state_pred(const Network& net, const TctlFormula& f,
                                  const LocationVector& locs, const DiscValues& disc,
                                  const Dbm& space) {
    using K = TctlFormula::Kind;
    int dim = space.dim();
    switch (f.kind) {
        case K::True_: return Federation::from(space);
        case K::False_: return Federation(dim);
        case K::AtLoc:
            return locs[f.proc] == f.loc ? Federation::from(space) : Federation(dim);
        case K::VarCmp: {
            int64_t rhs = f.cmp.rhs_is_var ? disc[f.cmp.rhs] : f.cmp.rhs;
            return rel_holds(f.cmp.rel, disc[f.cmp.var], rhs) ? Federation::from(space)
                                                              : Federation(dim);
        }
        case K::ClockCmp: {
            std::vector<DiffConstraint> cs;
            f.clock.expand(cs);
            return Federation::from(space.constrained(cs));
        }
        case K::Not: {
            Federation sub = eval_state_pred(net, *f.a, locs, disc, space);
            return Federation::from(space).subtract(sub);
        }
        case K::And:
            return eval_state_pred(net, *f.a, locs, disc, space)
                .intersect(eval_state_pred(net, *f.b, locs, disc, space));
        case K::Or: {
            Federation r = eval_state_pred(net, *f.a, locs, disc, space);
            r.merge(eval_state_pred(net, *f.b, locs, disc, space));
            return r;
        }
        case K::Imply: {
            Federation lhs = eval_state_pred(net, *f.a, locs, disc, space);
            Federation r = Federation::from(space).subtract(lhs);
            r.merge(eval_state_pred(net, *f.b, locs, disc, space));
            return r;
        }
        default: throw QueryError("predicate contains a temporal operator");
    }
}

// ----------------------------------------------------------------------------
// Time-predecessor-while closure: all states that can flow along the time
// line into `z` with every strictly-earlier position inside `w`. Exact for
// z within w's point set. Each hop hands control between member zones of w:
// hop A enters the target through a shared closure point of the waiting
// zone, hop B crosses an open facet after a positive delay.
inline Federation time_pred_within(const Federation& z, const Federation& w,
                                   bool* grew_out = nullptr) {
    Federation s = z;
    bool grew_any = false;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Dbm& wz : w.zones()) {
            Dbm clw = wz.closure();
            Federation a = s.intersect_zone(clw).down().intersect_zone(wz);
            if (s.merge(a)) grew = true;
            Federation b =
                s.intersect_zone(wz).down_strict().intersect_zone(clw).intersect(w);
            if (s.merge(b)) grew = true;
        }
        grew_any |= grew;
    }
    if (grew_out) *grew_out = grew_any;
    return s;
}

// ----------------------------------------------------------------------------
// Satisfaction sets over the forward-closed symbolic universe. Federations
// carry one auxiliary specification clock as the last index; it stays
// unconstrained except while a bounded modality is being evaluated.

class TctlChecker {
public:
    using SatSet = std::vector<Federation>;

    TctlChecker(const Network& net, const std::vector<int>& max_consts,
                uint64_t mem_limit_mb = 0)
        : net_(net), graph_(net, max_consts) {
        if (mem_limit_mb) graph_.set_memory_limit_mb(mem_limit_mb);
        graph_.explore();
        int n = graph_.config_count();
        universe_.reserve(n);
        inv_z_.reserve(n);
        for (int c = 0; c < n; ++c) {
            universe_.push_back(graph_.stored(c).lifted());
            inv_z_.push_back(graph_.invariant(c).lifted());
        }
        zdim_ = graph_.dim() + 1;
        zclock_ = graph_.dim();  // clock index of the auxiliary clock
    }

    ZoneGraph& graph() { return graph_; }
    const SatSet& universe() const { return universe_; }
    int zdim() const { return zdim_; }

    SatSet eval(const TctlFormula& f) {
        using K = TctlFormula::Kind;
        switch (f.kind) {
            case K::True_: return universe_;
            case K::False_: return empty_set();
            case K::AtLoc:
            case K::VarCmp:
            case K::ClockCmp: return atom_set(f);
            case K::Not: return complement(eval(*f.a));
            case K::And: return intersect(eval(*f.a), eval(*f.b));
            case K::Or: return unite(eval(*f.a), eval(*f.b));
            case K::Imply: return unite(complement(eval(*f.a)), eval(*f.b));
            case K::EF: return eu(universe_, eval(*f.a), f.bound);
            case K::EU: return eu(eval(*f.a), eval(*f.b), f.bound);
            case K::AG: return complement(eu(universe_, complement(eval(*f.a)), std::nullopt));
            case K::EG: return eg(eval(*f.a));
            case K::AF: return au(universe_, eval(*f.a), f.bound);
            case K::AU: return au(eval(*f.a), eval(*f.b), f.bound);
        }
        throw QueryError("unreachable");
    }

    // status = valid iff the initial state (all clocks zero) satisfies the
    // formula.
    Verdict verdict_of(const SatSet& sat) {
        Verdict v;
        v.stats = graph_.stats();
        for (const auto& fed : sat) v.stats.zones_stored += fed.size();
        std::vector<int64_t> zero(zdim_ - 1, 0);
        v.status = sat[graph_.initial_config()].contains(zero) ? Status::Valid
                                                               : Status::Invalid;
        return v;
    }

    // E[a U b]: least fixpoint over time and action predecessors, with the
    // Def-5 side condition that strictly-earlier positions satisfy a or b.
    SatSet eu(const SatSet& sa, const SatSet& sb, std::optional<int> bound) {
        SatSet target = sb;
        if (bound) target = intersect_bound(target, *bound);
        SatSet w = unite(sa, sb);
        SatSet s = target;
        int n = graph_.config_count();
        // Chaotic iteration swept from the most recently discovered configs
        // toward the initial one; forward edges mostly point at higher
        // discovery indices, so one sweep carries a growth across the graph.
        std::vector<char> dirty(n, 1);
        bool any = true;
        while (any) {
            any = false;
            for (int c = n - 1; c >= 0; --c) {
                if (!dirty[c]) continue;
                dirty[c] = 0;
                if (s[c].is_empty()) continue;
                s[c] = tpred_hops(s[c], w[c]);
                for (const auto& re : graph_.in_edges(c)) {
                    if (w[re.source].is_empty()) continue;
                    Federation pre = pre_action(net_, re.joint, s[c], inv_z_[re.source])
                                         .intersect(w[re.source]);
                    if (pre.is_empty()) continue;
                    if (s[re.source].merge(pre)) {
                        dirty[re.source] = 1;
                        any = true;
                    }
                }
            }
        }
        if (bound) return reset_project(s);
        return s;
    }

    // A[a U b] by the standard dualization over the same predecessors:
    // not (E[!b U (!a and !b)] or EG !b).
    //
    // For a bounded target the EG side decomposes: once the specification
    // clock passes the bound, the avoid set can never be left again, so
    // EG !b = E[!b U (z > c)] plus the divergence-free core below the bound.
    SatSet au(const SatSet& sa, const SatSet& sb, std::optional<int> bound) {
        SatSet target = sb;
        if (bound) target = intersect_bound(target, *bound);
        SatSet nb = complement(target);
        SatSet nanb = intersect(complement(sa), nb);
        SatSet bad = eu(nb, nanb, std::nullopt);
        if (bound) {
            std::vector<DiffConstraint> above{{0, zclock_, make_bound(-*bound, false)}};
            SatSet zover;
            zover.reserve(universe_.size());
            for (const auto& u : universe_) zover.push_back(u.constrained(above));
            bad = unite(bad, eu(nb, zover, std::nullopt));
            std::vector<DiffConstraint> upto{{zclock_, 0, make_bound(*bound, true)}};
            SatSet low;
            low.reserve(nb.size());
            for (const auto& f : nb) low.push_back(f.constrained(upto));
            bad = unite(bad, eg(low, /*allow_inf_delay=*/false));
        } else {
            bad = unite(bad, eg(nb));
        }
        SatSet result = complement(bad);
        if (bound) return reset_project(result);
        return result;
    }

    // EG a: greatest fixpoint. A state stays in the set while it can flow
    // inside the set to an action that re-enters it, to a point where time
    // diverges inside it, or to a timelock.
    SatSet eg(const SatSet& sa, bool allow_inf_delay = true) {
        SatSet y = sa;
        int n = graph_.config_count();
        std::vector<char> dirty(n, 1);
        bool any = true;
        while (any) {
            any = false;
            for (int c = n - 1; c >= 0; --c) {
                if (!dirty[c]) continue;
                dirty[c] = 0;
                if (y[c].is_empty()) continue;
                // Iterate locally: the waiting set is y[c] itself, so one
                // shrink can enable another.
                for (;;) {
                    Federation r(zdim_);
                    for (const auto& e : graph_.out_edges(c)) {
                        if (y[e.target].is_empty()) continue;
                        r.merge(pre_action(net_, e.joint, y[e.target], inv_z_[c]));
                    }
                    r = r.intersect(y[c]);
                    if (allow_inf_delay) r.merge(inf_delay(c, y[c]));
                    r.merge(timelock(c).intersect(y[c]));
                    Federation ynew = tpred_hops(r, y[c]);
                    if (ynew.includes(y[c])) break;
                    y[c] = ynew;
                    any = true;
                    for (const auto& re : graph_.in_edges(c)) dirty[re.source] = 1;
                    if (y[c].is_empty()) break;
                }
            }
        }
        return y;
    }

    Federation tpred_hops(const Federation& z, const Federation& w, bool* grew_out = nullptr) {
        return time_pred_within(z, w, grew_out);
    }

    // States of a configuration where time can diverge without leaving `y`.
    // Universe zones are delay-closed within the invariant, so escapes are
    // computed against the universe itself.
    Federation inf_delay(int cid, const Federation& y) {
        const Dbm& inv = graph_.invariant(cid);
        for (int i = 1; i < graph_.dim(); ++i)
            if (inv(i, 0) != kBoundInf) return Federation(zdim_);
        Federation esc = universe_[cid].subtract(y);
        if (esc.is_empty()) return universe_[cid];
        return universe_[cid].subtract(esc.down());
    }

    // Invariant boundary points with no enabled action at all: the end of a
    // maximal finite run.
    const Federation& timelock(int cid) {
        auto it = timelock_cache_.find(cid);
        if (it != timelock_cache_.end()) return it->second;
        const Dbm& inv_z = inv_z_[cid];
        Federation boundary =
            Federation::from(inv_z).subtract(Federation::from(inv_z).down_strict());
        if (!boundary.is_empty()) {
            for (const auto& t : graph_.joints(cid)) {
                LocationVector tgt = net_.apply_locations(t, graph_.config(cid).locs);
                Dbm tgt_inv = net_.invariant_zone(tgt, zdim_);
                Federation enabled =
                    pre_action(net_, t, Federation::from(tgt_inv), inv_z);
                boundary = boundary.subtract(enabled);
                if (boundary.is_empty()) break;
            }
        }
        boundary = boundary.intersect(universe_[cid]);
        return timelock_cache_.emplace(cid, std::move(boundary)).first->second;
    }

    // ---- satset combinators ----

    SatSet empty_set() const { return SatSet(graph_.config_count(), Federation(zdim_)); }

    SatSet atom_set(const TctlFormula& f) {
        SatSet s;
        s.reserve(graph_.config_count());
        for (int c = 0; c < graph_.config_count(); ++c) {
            const auto& cfg = graph_.config(c);
            Federation space = universe_[c];
            Federation out(zdim_);
            for (const Dbm& z : space.zones())
                out.merge(eval_state_pred(net_, f, cfg.locs, cfg.disc, z));
            s.push_back(std::move(out));
        }
        return s;
    }

    SatSet complement(const SatSet& s) {
        SatSet out;
        out.reserve(s.size());
        for (size_t c = 0; c < s.size(); ++c) out.push_back(universe_[c].subtract(s[c]));
        return out;
    }

    static SatSet intersect(const SatSet& a, const SatSet& b) {
        SatSet out;
        out.reserve(a.size());
        for (size_t c = 0; c < a.size(); ++c) out.push_back(a[c].intersect(b[c]));
        return out;
    }

    static SatSet unite(const SatSet& a, const SatSet& b) {
        SatSet out = a;
        for (size_t c = 0; c < a.size(); ++c) out[c].merge(b[c]);
        return out;
    }

    SatSet intersect_bound(const SatSet& s, int bound) {
        std::vector<DiffConstraint> cs{{zclock_, 0, make_bound(bound, true)}};
        SatSet out;
        out.reserve(s.size());
        for (const auto& f : s) out.push_back(f.constrained(cs));
        return out;
    }

    // {state : state with the auxiliary clock reset lies in s}.
    SatSet reset_project(const SatSet& s) {
        std::vector<DiffConstraint> zero{{zclock_, 0, kLeZero}, {0, zclock_, kLeZero}};
        SatSet out;
        out.reserve(s.size());
        for (const auto& f : s) out.push_back(f.constrained(zero).freed(zclock_));
        return out;
    }

    // Model-dimension projection (the auxiliary clock dropped).
    std::vector<Federation> project_model(const SatSet& s) const {
        std::vector<Federation> out;
        out.reserve(s.size());
        for (const auto& f : s) out.push_back(f.dropped_last());
        return out;
    }

private:
    const Network& net_;
    ZoneGraph graph_;
    int zdim_ = 0;
    int zclock_ = 0;
    SatSet universe_;
    std::vector<Dbm> inv_z_;
    std::unordered_map<int, Federation> timelock_cache_;
};

// ----------------------------------------------------------------------------
// check(): verdicts, engine selection, and the witness policy.

enum class CheckEngine { Auto, Tctl, Forward, Backward };

struct CheckOptions {
    CheckEngine engine = CheckEngine::Auto;
    uint64_t mem_limit_mb = 0;
    bool want_witness = true;
};

namespace check_detail {

// AG(p) and EF(p) with temporal-free p reduce to plain reachability.
struct Reduction {
    enum Kind { None, AgPred, EfPred } kind = None;
    TctlPtr pred;  // target predicate: !p for AG(p), p for EF(p)
};

inline Reduction reducible(const TctlFormula& f) {
    using K = TctlFormula::Kind;
    if (f.kind == K::AG && !f.bound && f.a->temporal_free())
        return {Reduction::AgPred, TctlFormula::make(K::Not, f.a)};
    if (f.kind == K::EF && !f.bound && f.a->temporal_free()) return {Reduction::EfPred, f.a};
    return {};
}

inline std::function<Federation(int, ZoneGraph&)> as_target(const Network& net, TctlPtr pred) {
    return [&net, pred](int cid, ZoneGraph& g) {
        const auto& cfg = g.config(cid);
        Federation out(g.dim());
        out.merge(eval_state_pred(net, *pred, cfg.locs, cfg.disc, g.invariant(cid)));
        return out;
    };
}

// Pattern AG(p imply AF q) / AG(p imply AF{<=c} q) with temporal-free p, q.
struct ResponseShape {
    bool matched = false;
    TctlPtr premise;
    TctlPtr response;
    std::optional<int> bound;
};

inline ResponseShape response_shape(const TctlFormula& f) {
    using K = TctlFormula::Kind;
    if (f.kind != K::AG || f.bound) return {};
    const TctlFormula& body = *f.a;
    if (body.kind != K::Imply || !body.a->temporal_free()) return {};
    const TctlFormula& rhs = *body.b;
    if (rhs.kind != K::AF || !rhs.a->temporal_free()) return {};
    return {true, body.a, rhs.a, rhs.bound};
}

}  // namespace check_detail

class Checker {
public:
    explicit Checker(const Network& net) : net_(net) {}

    Verdict check(const TctlFormula& f, const CheckOptions& opts = {}) {
        std::vector<int> k = max_constants(net_, f);
        auto red = check_detail::reducible(f);

        if (red.kind != check_detail::Reduction::None &&
            (opts.engine == CheckEngine::Auto || opts.engine == CheckEngine::Forward ||
             opts.engine == CheckEngine::Backward)) {
            auto target = check_detail::as_target(net_, red.pred);
            Verdict v = opts.engine == CheckEngine::Backward
                            ? backward_reach(net_, k, target, opts.mem_limit_mb)
                            : forward_reach(net_, k, target, opts.mem_limit_mb);
            // The reachability verdict speaks about the target set; translate
            // to formula satisfaction.
            if (red.kind == check_detail::Reduction::EfPred) {
                v.status = v.status == Status::Invalid ? Status::Valid : Status::Invalid;
                v.witness.reset();  // witnesses accompany violations only
            }
            if (!opts.want_witness) v.witness.reset();
            return v;
        }

        TctlChecker checker(net_, k, opts.mem_limit_mb);
        auto sat = checker.eval(f);
        Verdict v = checker.verdict_of(sat);
        if (v.status == Status::Invalid && opts.want_witness)
            attach_witness(checker, f, v);
        return v;
    }

private:
    // Witnesses for violations that end in a finite maximal run:
    //   AG(p imply AF q): prefix to a state satisfying p and EG !q, then a
    //   suffix through !q states to a configuration with no transitions.
    //   AF q at top level: the suffix alone, from the initial state.
    void attach_witness(TctlChecker& checker, const TctlFormula& f, Verdict& v) {
        using K = TctlFormula::Kind;
        auto shape = check_detail::response_shape(f);
        TctlPtr response;
        TctlPtr premise;
        if (shape.matched && !shape.bound) {
            premise = shape.premise;
            response = shape.response;
        } else if (f.kind == K::AF && !f.bound && f.a->temporal_free()) {
            premise = TctlFormula::make(K::True_);
            response = f.a;
        } else {
            return;  // status-only for other shapes
        }

        // Violation set: premise holds and no path is forced into response.
        auto not_resp = TctlFormula::make(K::Not, response);
        auto egset = checker.eval(*TctlFormula::make(K::EG, not_resp));
        auto premset = checker.eval(*premise);
        auto bad = TctlChecker::intersect(premset, egset);
        std::vector<Federation> bad_model = checker.project_model(bad);
        std::vector<Federation> notq_model = checker.project_model(checker.eval(*not_resp));

        ZoneGraph& g = checker.graph();

        // Prefix: shortest path into the violation set (nodes are stored in
        // breadth-first discovery order).
        int hit_node = -1;
        const auto& nodes = g.nodes();
        for (size_t i = 0; i < nodes.size() && hit_node < 0; ++i)
            if (!bad_model[nodes[i].cid].intersect_zone(nodes[i].zone).is_empty())
                hit_node = static_cast<int>(i);
        if (hit_node < 0) return;

        auto path = g.path_to(hit_node);
        int hit_cid = path.empty() ? g.initial_config() : path.back().second;

        // Suffix: BFS through !q states to a transition-free configuration.
        auto suffix = find_suffix(g, hit_cid, bad_model[hit_cid], notq_model);
        if (!suffix) return;
        for (auto& step : *suffix) path.push_back(step);

        // Exact recomputation and concretization over the combined path.
        v.witness = build_trace(g, path, final_target_);
    }

    // BFS over (config, zone) pairs restricted to `allowed`, looking for a
    // configuration with no discrete transitions and a divergent invariant.
    std::optional<std::vector<std::pair<JointTransition, int>>> find_suffix(
        ZoneGraph& g, int start_cid, const Federation& start_fed,
        const std::vector<Federation>& allowed) {
        struct Item {
            int cid;
            Dbm zone;
            int parent;
            JointTransition via;
        };
        auto divergent_terminal = [&](int cid) {
            if (!g.joints(cid).empty()) return false;
            const Dbm& inv = g.invariant(cid);
            for (int i = 1; i < g.dim(); ++i)
                if (inv(i, 0) != kBoundInf) return false;
            return true;
        };
        std::vector<Item> items;
        std::deque<int> queue;
        for (const Dbm& z : start_fed.zones()) {
            items.push_back({start_cid, z, -1, {}});
            queue.push_back(static_cast<int>(items.size()) - 1);
        }
        size_t budget = 20000;
        std::unordered_map<int, Federation> visited;
        while (!queue.empty() && items.size() < budget) {
            int id = queue.front();
            queue.pop_front();
            Item item = items[id];
            if (divergent_terminal(item.cid)) {
                std::vector<std::pair<JointTransition, int>> rev;
                for (int n = id; items[n].parent >= 0; n = items[n].parent)
                    rev.emplace_back(items[n].via, items[n].cid);
                std::reverse(rev.begin(), rev.end());
                final_target_ = Federation::from(item.zone);
                return rev;
            }
            for (const auto& t : g.joints(item.cid)) {
                SymbolicState src{g.config(item.cid).locs, g.config(item.cid).disc, item.zone};
                auto nxt = successor(net_, src, t);
                if (!nxt) continue;
                int tcid = g.intern(nxt->locs, nxt->disc);
                if (tcid >= static_cast<int>(allowed.size())) continue;  // outside universe
                Federation restricted =
                    allowed[tcid].intersect_zone(g.abstracted(nxt->zone, nxt->locs));
                auto [it, inserted] = visited.try_emplace(tcid, Federation(g.dim()));
                for (const Dbm& z : restricted.zones()) {
                    if (it->second.covers(z)) continue;
                    it->second.insert(z);
                    items.push_back({tcid, z, id, t});
                    queue.push_back(static_cast<int>(items.size()) - 1);
                }
            }
        }
        return std::nullopt;
    }

    // Exact forward zones + backward pruning + concretization (same scheme
    // as forward_reach witnesses).
    std::optional<Trace> build_trace(ZoneGraph& g,
                                     const std::vector<std::pair<JointTransition, int>>& path,
                                     const Federation& target_fed) {
        int dim = net_.clock_count() + 1;
        int n = static_cast<int>(path.size());
        std::vector<Dbm> exact;
        exact.reserve(n + 1);
        exact.push_back(g.initial_zone());
        LocationVector locs = net_.initial_locations();
        DiscValues disc = net_.initial_values();
        for (int i = 0; i < n; ++i) {
            SymbolicState s{locs, disc, exact.back()};
            auto nxt = successor(net_, s, path[i].first);
            if (!nxt) return std::nullopt;
            exact.push_back(nxt->zone);
            locs = nxt->locs;
            disc = nxt->disc;
        }
        Federation fin = target_fed.intersect_zone(exact.back());
        if (fin.is_empty()) return std::nullopt;
        std::vector<Federation> pruned(n, Federation(dim));
        Federation after = fin.down().intersect_zone(exact.back());
        for (int i = n - 1; i >= 0; --i) {
            LocationVector src_locs = net_.initial_locations();
            if (i > 0) src_locs = g.config(path[i - 1].second).locs;
            Dbm src_inv = net_.invariant_zone(src_locs, dim);
            Federation pre =
                pre_action(net_, path[i].first, after, src_inv).intersect_zone(exact[i]);
            pruned[i] = pre;
            after = pre.down().intersect_zone(exact[i]);
        }
        return concretize_path(net_, path, pruned, fin);
    }

    const Network& net_;
    Federation final_target_{1};
};

inline Verdict check(const Network& net, const TctlFormula& f, const CheckOptions& opts = {}) {
    return Checker(net).check(f, opts);
}

inline Verdict check(const Network& net, const std::string& query,
                     const CheckOptions& opts = {}) {
    return Checker(net).check(*parse_query(net, query), opts);
}

}  // namespace tempo
