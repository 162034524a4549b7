#pragma once

// Line-oriented text format for networks of timed automata:
//
//   clocks x1 x2
//   vars
//     vote[1] 0..2 = 0
//   channels
//     start broadcast
//     yes binary
//   automaton P1
//     loc waitVotes [x1 <= 80]
//     init waitVotes
//     edge a -> b guard x1 < 15 && vote[1] == 2 sync yes? reset x1 do decision[1] := 2
//
// Unknown sections are rejected; every diagnostic carries its line number.

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tempo/model.hpp"

namespace tempo {

struct ParseResult {
    std::optional<Network> network;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return network.has_value(); }
};

namespace detail {

struct Tok {
    enum Kind { Ident, Number, Symbol, End } kind = End;
    std::string text;
    int number = 0;
};

class LineLexer {
public:
    explicit LineLexer(const std::string& s) : s_(s) {}

    Tok next() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ >= s_.size() || s_[pos_] == '#') return {Tok::End, "", 0};
        char c = s_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            // Optional [digits] suffix belongs to the identifier.
            if (pos_ < s_.size() && s_[pos_] == '[') {
                size_t save = pos_;
                ++pos_;
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
            return {Tok::Ident, s_.substr(start, pos_ - start), 0};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < s_.size() &&
             std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
            size_t start = pos_;
            if (c == '-') ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string t = s_.substr(start, pos_ - start);
            return {Tok::Number, t, std::stoi(t)};
        }
        static const char* two[] = {"->", ":=", "..", "==", "<=", ">=", "&&"};
        for (const char* t : two)
            if (s_.compare(pos_, 2, t) == 0) {
                pos_ += 2;
                return {Tok::Symbol, t, 0};
            }
        ++pos_;
        return {Tok::Symbol, std::string(1, c), 0};
    }

    Tok peek() {
        size_t save = pos_;
        Tok t = next();
        pos_ = save;
        return t;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;
};

}  // namespace detail

class ModelParser {
public:
    ParseResult parse(const std::string& text) {
        net_ = Network();
        diags_.clear();
        std::istringstream in(text);
        std::string raw;
        int lineno = 0;
        std::vector<std::pair<int, std::string>> lines;
        while (std::getline(in, raw)) {
            ++lineno;
            lines.emplace_back(lineno, raw);
        }

        // First pass: declarations, so later sections can reference them.
        enum Section { None, Vars, Channels, Auto } section = None;
        for (auto& [ln, text_line] : lines) {
            detail::LineLexer lex(text_line);
            detail::Tok t = lex.next();
            if (t.kind == detail::Tok::End) continue;
            if (t.kind != detail::Tok::Ident) {
                error(ln, "expected a section or statement keyword");
                continue;
            }
            if (t.text == "clocks") {
                section = None;
                for (detail::Tok c = lex.next(); c.kind != detail::Tok::End; c = lex.next()) {
                    if (c.kind == detail::Tok::Symbol && c.text == ",") continue;
                    if (c.kind != detail::Tok::Ident)
                        error(ln, "expected clock name");
                    else
                        net_.clocks.push_back(c.text);
                }
            } else if (t.text == "vars") {
                section = Vars;
            } else if (t.text == "channels") {
                section = Channels;
            } else if (t.text == "automaton") {
                section = Auto;
                detail::Tok name = lex.next();
                if (name.kind != detail::Tok::Ident) {
                    error(ln, "expected automaton name");
                    continue;
                }
                net_.automata.push_back(Automaton{name.text, {}, 0, {}});
            } else if (section == Vars && t.kind == detail::Tok::Ident) {
                parse_var(ln, t.text, lex);
            } else if (section == Channels && t.kind == detail::Tok::Ident) {
                parse_channel(ln, t.text, lex);
            } else if (section == Auto &&
                       (t.text == "loc" || t.text == "init" || t.text == "edge")) {
                // handled in the second pass
            } else {
                error(ln, "unknown section or statement '" + t.text + "'");
            }
        }

        // Second pass: automaton bodies (locations first, then edges so that
        // forward references to locations inside one automaton work).
        int current = -1;
        for (auto& [ln, text_line] : lines) {
            detail::LineLexer lex(text_line);
            detail::Tok t = lex.next();
            if (t.kind != detail::Tok::Ident) continue;
            if (t.text == "automaton") {
                ++current;
            } else if (t.text == "loc" && current >= 0) {
                parse_loc(ln, net_.automata[current], lex);
            }
        }
        current = -1;
        for (auto& [ln, text_line] : lines) {
            detail::LineLexer lex(text_line);
            detail::Tok t = lex.next();
            if (t.kind != detail::Tok::Ident) continue;
            if (t.text == "automaton") {
                ++current;
            } else if (t.text == "init" && current >= 0) {
                parse_init(ln, net_.automata[current], lex);
            } else if (t.text == "edge" && current >= 0) {
                parse_edge(ln, net_.automata[current], lex);
            }
        }

        ParseResult r;
        r.diagnostics = diags_;
        bool has_error = false;
        for (const auto& d : diags_) has_error |= d.error;
        if (!has_error) {
            auto vd = net_.validate();
            for (const auto& d : vd) {
                r.diagnostics.push_back(d);
                has_error |= d.error;
            }
        }
        if (!has_error) r.network = net_;
        return r;
    }

private:
    void error(int ln, const std::string& m) { diags_.push_back({true, ln, m}); }

    void parse_var(int ln, const std::string& name, detail::LineLexer& lex) {
        DiscreteVar v;
        v.name = name;
        detail::Tok lo = lex.next();
        detail::Tok dots = lex.next();
        detail::Tok hi = lex.next();
        detail::Tok eq = lex.next();
        detail::Tok init = lex.next();
        if (lo.kind != detail::Tok::Number || dots.text != ".." ||
            hi.kind != detail::Tok::Number || eq.text != "=" ||
            init.kind != detail::Tok::Number) {
            error(ln, "expected 'name lo..hi = init'");
            return;
        }
        v.lo = lo.number;
        v.hi = hi.number;
        v.init = init.number;
        net_.vars.push_back(v);
    }

    void parse_channel(int ln, const std::string& name, detail::LineLexer& lex) {
        detail::Tok kind = lex.next();
        if (kind.text == "binary")
            net_.channels.push_back({name, ChannelKind::Binary});
        else if (kind.text == "broadcast")
            net_.channels.push_back({name, ChannelKind::Broadcast});
        else
            error(ln, "expected 'binary' or 'broadcast'");
    }

    void parse_loc(int ln, Automaton& a, detail::LineLexer& lex) {
        detail::Tok name = lex.next();
        if (name.kind != detail::Tok::Ident) {
            error(ln, "expected location name");
            return;
        }
        Location loc;
        loc.name = name.text;
        detail::Tok t = lex.next();
        if (t.kind == detail::Tok::Symbol && t.text == "[") {
            if (!parse_clock_conjunction(ln, lex, loc.invariant, "]")) return;
        } else if (t.kind != detail::Tok::End) {
            error(ln, "unexpected token after location name");
            return;
        }
        a.locations.push_back(loc);
    }

    void parse_init(int ln, Automaton& a, detail::LineLexer& lex) {
        detail::Tok name = lex.next();
        int idx = name.kind == detail::Tok::Ident ? a.location_index(name.text) : -1;
        if (idx < 0) {
            error(ln, "undeclared initial location");
            return;
        }
        a.initial = idx;
    }

    void parse_edge(int ln, Automaton& a, detail::LineLexer& lex) {
        detail::Tok src = lex.next();
        detail::Tok arrow = lex.next();
        detail::Tok dst = lex.next();
        if (src.kind != detail::Tok::Ident || arrow.text != "->" ||
            dst.kind != detail::Tok::Ident) {
            error(ln, "expected 'edge src -> dst'");
            return;
        }
        Edge e;
        e.src = a.location_index(src.text);
        e.dst = a.location_index(dst.text);
        if (e.src < 0 || e.dst < 0) {
            error(ln, "undeclared location in edge");
            return;
        }
        for (detail::Tok t = lex.next(); t.kind != detail::Tok::End; t = lex.next()) {
            if (t.text == "guard") {
                if (!parse_guard(ln, lex, e)) return;
            } else if (t.text == "sync") {
                detail::Tok ch = lex.next();
                detail::Tok pol = lex.next();
                int ci = ch.kind == detail::Tok::Ident ? net_.channel_index(ch.text) : -1;
                if (ci < 0) {
                    error(ln, "undeclared channel '" + ch.text + "'");
                    return;
                }
                if (pol.text == "!")
                    e.sync = Sync{ci, Polarity::Send};
                else if (pol.text == "?")
                    e.sync = Sync{ci, Polarity::Receive};
                else {
                    error(ln, "expected '!' or '?' after channel");
                    return;
                }
            } else if (t.text == "reset") {
                for (;;) {
                    detail::Tok c = lex.next();
                    int ci = c.kind == detail::Tok::Ident ? net_.clock_index(c.text) : -1;
                    if (ci < 0) {
                        error(ln, "undeclared clock in reset");
                        return;
                    }
                    e.resets.push_back(ci);
                    detail::Tok comma = lex.peek();
                    if (comma.text != ",") break;
                    lex.next();
                }
            } else if (t.text == "do") {
                for (;;) {
                    detail::Tok v = lex.next();
                    detail::Tok assign = lex.next();
                    detail::Tok rhs = lex.next();
                    int vi = v.kind == detail::Tok::Ident ? net_.var_index(v.text) : -1;
                    if (vi < 0 || assign.text != ":=") {
                        error(ln, "expected 'var := value' in do");
                        return;
                    }
                    Assignment u;
                    u.var = vi;
                    if (rhs.kind == detail::Tok::Number) {
                        u.rhs = rhs.number;
                    } else if (rhs.kind == detail::Tok::Ident) {
                        int ri = net_.var_index(rhs.text);
                        if (ri < 0) {
                            error(ln, "undeclared variable '" + rhs.text + "'");
                            return;
                        }
                        u.rhs_is_var = true;
                        u.rhs = ri;
                    } else {
                        error(ln, "expected constant or variable after ':='");
                        return;
                    }
                    e.updates.push_back(u);
                    detail::Tok comma = lex.peek();
                    if (comma.text != ",") break;
                    lex.next();
                }
            } else {
                error(ln, "unexpected token '" + t.text + "' in edge");
                return;
            }
        }
        a.edges.push_back(e);
    }

    static std::optional<Rel> rel_of(const std::string& s) {
        if (s == "<") return Rel::Lt;
        if (s == "<=") return Rel::Le;
        if (s == "==" || s == "=") return Rel::Eq;
        if (s == ">") return Rel::Gt;
        if (s == ">=") return Rel::Ge;
        return std::nullopt;
    }

    // atom (&& atom)* up to `until` (or end of line when until is empty).
    bool parse_clock_conjunction(int ln, detail::LineLexer& lex,
                                 std::vector<AtomicConstraint>& out, const std::string& until) {
        for (;;) {
            detail::Tok lhs = lex.next();
            if (lhs.text == until && !until.empty()) return true;
            detail::Tok relt = lex.next();
            detail::Tok rhs = lex.next();
            auto rel = rel_of(relt.text);
            int ci = lhs.kind == detail::Tok::Ident ? net_.clock_index(lhs.text) : -1;
            if (ci < 0 || !rel || rhs.kind != detail::Tok::Number || rhs.number < 0) {
                error(ln, "expected 'clock rel nat' in invariant");
                return false;
            }
            out.push_back({ci, 0, *rel, rhs.number});
            detail::Tok sep = lex.next();
            if (sep.text == until && !until.empty()) return true;
            if (sep.kind == detail::Tok::End && until.empty()) return true;
            if (sep.text != "&&") {
                error(ln, "expected '&&' between constraints");
                return false;
            }
        }
    }

    // Mixed clock/discrete conjunction for edge guards.
    bool parse_guard(int ln, detail::LineLexer& lex, Edge& e) {
        for (;;) {
            detail::Tok lhs = lex.next();
            detail::Tok relt = lex.next();
            detail::Tok rhs = lex.next();
            auto rel = rel_of(relt.text);
            if (lhs.kind != detail::Tok::Ident || !rel) {
                error(ln, "expected 'name rel value' in guard");
                return false;
            }
            int ci = net_.clock_index(lhs.text);
            int vi = net_.var_index(lhs.text);
            if (ci >= 1) {
                if (rhs.kind != detail::Tok::Number || rhs.number < 0) {
                    error(ln, "clock guards compare against natural constants");
                    return false;
                }
                e.clock_guard.push_back({ci, 0, *rel, rhs.number});
            } else if (vi >= 0) {
                DiscComparison g;
                g.var = vi;
                g.rel = *rel;
                if (rhs.kind == detail::Tok::Number) {
                    g.rhs = rhs.number;
                } else if (rhs.kind == detail::Tok::Ident) {
                    int ri = net_.var_index(rhs.text);
                    if (ri < 0) {
                        error(ln, "undeclared identifier '" + rhs.text + "'");
                        return false;
                    }
                    g.rhs_is_var = true;
                    g.rhs = ri;
                } else {
                    error(ln, "expected constant or variable in guard");
                    return false;
                }
                e.disc_guard.push_back(g);
            } else {
                error(ln, "undeclared identifier '" + lhs.text + "'");
                return false;
            }
            detail::Tok sep = lex.peek();
            if (sep.text != "&&") return true;
            lex.next();
        }
    }

    Network net_;
    std::vector<Diagnostic> diags_;
};

inline ParseResult parse_model(const std::string& text) { return ModelParser().parse(text); }

inline std::string Network::serialize() const {
    std::ostringstream os;
    if (!clocks.empty()) {
        os << "clocks";
        for (const auto& c : clocks) os << " " << c;
        os << "\n";
    }
    if (!vars.empty()) {
        os << "vars\n";
        for (const auto& v : vars)
            os << "  " << v.name << " " << v.lo << ".." << v.hi << " = " << v.init << "\n";
    }
    if (!channels.empty()) {
        os << "channels\n";
        for (const auto& c : channels)
            os << "  " << c.name << " "
               << (c.kind == ChannelKind::Binary ? "binary" : "broadcast") << "\n";
    }
    auto atom_text = [&](const AtomicConstraint& c) {
        std::string s = clocks[c.lhs - 1];
        if (c.rhs >= 1) s += " - " + clocks[c.rhs - 1];
        s += std::string(" ") + rel_text(c.rel) + " " + std::to_string(c.constant);
        return s;
    };
    for (const auto& a : automata) {
        os << "automaton " << a.name << "\n";
        for (const auto& l : a.locations) {
            os << "  loc " << l.name;
            if (!l.invariant.empty()) {
                os << " [";
                for (size_t i = 0; i < l.invariant.size(); ++i)
                    os << (i ? " && " : "") << atom_text(l.invariant[i]);
                os << "]";
            }
            os << "\n";
        }
        os << "  init " << a.locations[a.initial].name << "\n";
        for (const auto& e : a.edges) {
            os << "  edge " << a.locations[e.src].name << " -> " << a.locations[e.dst].name;
            if (!e.clock_guard.empty() || !e.disc_guard.empty()) {
                os << " guard ";
                bool first = true;
                for (const auto& c : e.clock_guard) {
                    os << (first ? "" : " && ") << atom_text(c);
                    first = false;
                }
                for (const auto& g : e.disc_guard) {
                    os << (first ? "" : " && ") << vars[g.var].name << " " << rel_text(g.rel)
                       << " " << (g.rhs_is_var ? vars[g.rhs].name : std::to_string(g.rhs));
                    first = false;
                }
            }
            if (e.sync)
                os << " sync " << channels[e.sync->channel].name
                   << (e.sync->polarity == Polarity::Send ? "!" : "?");
            if (!e.resets.empty()) {
                os << " reset ";
                for (size_t i = 0; i < e.resets.size(); ++i)
                    os << (i ? "," : "") << clocks[e.resets[i] - 1];
            }
            if (!e.updates.empty()) {
                os << " do ";
                for (size_t i = 0; i < e.updates.size(); ++i) {
                    const auto& u = e.updates[i];
                    os << (i ? ", " : "") << vars[u.var].name << " := "
                       << (u.rhs_is_var ? vars[u.rhs].name : std::to_string(u.rhs));
                }
            }
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace tempo
