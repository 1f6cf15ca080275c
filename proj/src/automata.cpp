#include "kcq/automata.hpp"
#include "kcq/errors.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace kcq {

bool Ldba::is_accepting(AutState q) const {
    return std::find(accepting.begin(), accepting.end(), q) != accepting.end();
}

bool Ldba::is_nondet(AutState q) const {
    return std::find(nondet_part.begin(), nondet_part.end(), q) != nondet_part.end();
}

std::optional<std::size_t> Ldba::prop_index(std::string_view name) const {
    for (std::size_t i = 0; i < ap.size(); ++i)
        if (ap[i] == name) return i;
    return std::nullopt;
}

Ldba Ldba::with_states(std::vector<std::string> ap, std::size_t n) {
    if (ap.size() > kMaxPropositions) throw Error("too many atomic propositions");
    Ldba a;
    a.ap = std::move(ap);
    a.num_states = n;
    a.delta.assign(n, std::vector<std::vector<AutState>>(a.num_letters()));
    a.epsilon_edges.assign(n, {});
    return a;
}

AutState step_automaton(const Ldba& a, AutState q, Letter letter) {
    if (letter.is_epsilon()) throw Error("step_automaton called with epsilon; use epsilon_successors");
    if (q >= a.num_states) throw Error("automaton state q" + std::to_string(q) + " out of range");
    const auto& succ = a.delta[q][letter.props()];
    if (succ.size() != 1) throw Error("automaton is not total at (q" + std::to_string(q) + "," + format_letter(a, letter) + ")");
    return succ.front();
}

std::span<const AutState> epsilon_successors(const Ldba& a, AutState q) {
    if (q >= a.num_states) throw Error("automaton state q" + std::to_string(q) + " out of range");
    return a.epsilon_edges[q];
}

std::string format_letter(const Ldba& a, Letter letter) {
    if (letter.is_epsilon()) return "eps";
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < a.ap.size(); ++i) {
        if ((letter.props() >> i) & 1u) {
            if (!first) out += ",";
            out += a.ap[i];
            first = false;
        }
    }
    return out + "}";
}

std::vector<std::string> validate_ldba(const Ldba& a) {
    std::vector<std::string> violations;
    const auto name = [](AutState q) { return "q" + std::to_string(q); };
    const auto in_range = [&](AutState q) { return q < a.num_states; };

    // Partition Q = Q_N + Q_D.
    std::vector<int> membership(a.num_states, 0);
    for (AutState q : a.nondet_part) {
        if (!in_range(q)) {
            violations.push_back("unknown state id " + std::to_string(q) + " in Q_N");
            continue;
        }
        membership[q] |= 1;
    }
    for (AutState q : a.det_part) {
        if (!in_range(q)) {
            violations.push_back("unknown state id " + std::to_string(q) + " in Q_D");
            continue;
        }
        membership[q] |= 2;
    }
    for (AutState q = 0; q < a.num_states; ++q) {
        if (membership[q] == 3) violations.push_back("state " + name(q) + " in both Q_N and Q_D");
        if (membership[q] == 0) violations.push_back("state " + name(q) + " in neither Q_N nor Q_D");
    }
    const auto in_det = [&](AutState q) { return in_range(q) && (membership[q] & 2) != 0; };
    const auto in_nondet = [&](AutState q) { return in_range(q) && (membership[q] & 1) != 0; };

    // Condition 1.
    if (!in_nondet(a.initial)) violations.push_back("initial state not in Q_N");
    for (AutState q : a.accepting) {
        if (!in_range(q))
            violations.push_back("unknown state id " + std::to_string(q) + " in accepting set");
        else if (in_nondet(q))
            violations.push_back("accepting state in Q_N: " + name(q));
    }

    // Conditions 2 and 3.
    for (AutState q = 0; q < a.num_states && q < a.delta.size(); ++q) {
        for (PropSet letter = 0; letter < a.delta[q].size(); ++letter) {
            const auto& succ = a.delta[q][letter];
            const std::string where = "(" + name(q) + "," + format_letter(a, Letter::of(letter)) + ")";
            if (succ.size() > 1) violations.push_back("determinism violated at " + where);
            for (AutState t : succ) {
                if (!in_range(t))
                    violations.push_back("unknown state id " + std::to_string(t) + " at " + where);
                else if (in_det(q) && !in_det(t))
                    violations.push_back("successor outside Q_D at " + where);
            }
        }
        if (q < a.epsilon_edges.size() && in_det(q)) {
            const auto& eps = a.epsilon_edges[q];
            const std::string where = "(" + name(q) + ",eps)";
            if (eps.size() > 1) violations.push_back("determinism violated at " + where);
            for (AutState t : eps)
                if (in_range(t) && !in_det(t)) violations.push_back("successor outside Q_D at " + where);
        }
        if (q < a.epsilon_edges.size()) {
            for (AutState t : a.epsilon_edges[q])
                if (!in_range(t)) violations.push_back("unknown state id " + std::to_string(t) + " at (" + name(q) + ",eps)");
        }
    }
    return violations;
}

void complete_with_sink(Ldba& a) {
    bool missing = false;
    for (const auto& row : a.delta)
        for (const auto& succ : row) missing = missing || succ.empty();
    if (!missing) return;
    const AutState sink = static_cast<AutState>(a.num_states);
    ++a.num_states;
    a.delta.emplace_back(a.num_letters(), std::vector<AutState>{sink});
    a.epsilon_edges.emplace_back();
    a.det_part.push_back(sink);
    for (auto& row : a.delta)
        for (auto& succ : row)
            if (succ.empty()) succ.push_back(sink);
    a.sink = sink;
}

namespace {

struct PendingEdge {
    std::size_t line;
    text::Token src, dst;
    std::string_view letter;
    std::size_t letter_column;
};

std::vector<PropSet> parse_letter(std::string_view tok, std::size_t column, const Ldba& a, std::size_t line) {
    if (tok.front() != '{') return expand_guard(tok, a.ap, line, column - 1);
    if (tok.back() != '}') throw ParseError("unterminated letter", line, column);
    PropSet mask = 0;
    std::string_view body = tok.substr(1, tok.size() - 2);
    std::size_t offset = column + 1;
    while (!body.empty()) {
        const auto comma = body.find(',');
        std::size_t col = offset;
        std::string_view item = text::trim(body.substr(0, comma), col);
        if (item.empty()) throw ParseError("empty proposition in letter", line, col);
        const auto idx = a.prop_index(item);
        if (!idx)
            throw SemanticError({"proposition '" + std::string(item) + "' not declared (line " + std::to_string(line) +
                                 ", column " + std::to_string(col) + ")"});
        mask |= PropSet{1} << *idx;
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
        offset += comma + 1;
    }
    return {mask};
}

AutState parse_state(const text::Token& tok, std::size_t line, std::size_t num_states) {
    const long long v = text::parse_int(tok, line);
    if (v < 0 || static_cast<std::size_t>(v) >= num_states)
        throw SemanticError({"unknown state id " + std::string(tok.text) + " (line " + std::to_string(line) + ", column " +
                             std::to_string(tok.column) + ")"});
    return static_cast<AutState>(v);
}

}  // namespace

Ldba parse_ldba(std::string_view source) {
    const auto dirs = text::directives(source);
    std::vector<std::string> ap;
    std::optional<std::size_t> num_states;
    std::optional<text::Directive> initial_dir, accepting_dir, nondet_dir;
    std::vector<PendingEdge> edges;
    std::set<std::string> seen;

    for (const auto& d : dirs) {
        const std::string key(d.key);
        if (key != "edge" && !seen.insert(key).second)
            throw ParseError("duplicate '" + key + "' directive", d.line, d.key_column);
        if (key == "ap") {
            for (const auto& tok : text::tokenize(d.value, d.value_column)) {
                if (std::find(ap.begin(), ap.end(), tok.text) != ap.end())
                    throw ParseError("duplicate proposition '" + std::string(tok.text) + "'", d.line, tok.column);
                ap.emplace_back(tok.text);
            }
            if (ap.size() > kMaxPropositions) throw ParseError("too many propositions", d.line, d.value_column);
        } else if (key == "states") {
            const auto toks = text::tokenize(d.value, d.value_column);
            if (toks.size() != 1) throw ParseError("expected a single state count", d.line, d.value_column);
            const long long n = text::parse_int(toks[0], d.line);
            if (n <= 0) throw ParseError("automaton must have at least one state", d.line, toks[0].column);
            num_states = static_cast<std::size_t>(n);
        } else if (key == "initial") {
            initial_dir = d;
        } else if (key == "accepting") {
            accepting_dir = d;
        } else if (key == "nondet") {
            nondet_dir = d;
        } else if (key == "edge") {
            const auto toks = text::tokenize(d.value, d.value_column);
            if (toks.size() < 3) throw ParseError("expected 'edge: <src> <letter> <dst>'", d.line, d.value_column);
            PendingEdge e{d.line, toks.front(), toks.back(), {}, toks[1].column};
            const std::size_t begin = toks[1].column - d.value_column;
            const std::size_t end = toks.back().column - d.value_column;
            std::size_t col = toks[1].column;
            e.letter = text::trim(d.value.substr(begin, end - begin), col);
            edges.push_back(e);
        } else {
            throw ParseError("unknown directive '" + key + "'", d.line, d.key_column);
        }
    }

    if (!num_states) {
        const std::size_t line = dirs.empty() ? 1 : dirs.back().line;
        throw ParseError("missing 'states' directive (automaton has no states)", line, 1);
    }
    if (!initial_dir) throw ParseError("missing 'initial' directive", dirs.back().line, 1);

    Ldba a = Ldba::with_states(ap, *num_states);

    {
        const auto toks = text::tokenize(initial_dir->value, initial_dir->value_column);
        if (toks.size() != 1) throw ParseError("expected a single initial state", initial_dir->line, initial_dir->value_column);
        a.initial = parse_state(toks[0], initial_dir->line, a.num_states);
    }
    if (accepting_dir)
        for (const auto& tok : text::tokenize(accepting_dir->value, accepting_dir->value_column))
            a.accepting.push_back(parse_state(tok, accepting_dir->line, a.num_states));
    std::vector<bool> nondet(a.num_states, false);
    if (nondet_dir)
        for (const auto& tok : text::tokenize(nondet_dir->value, nondet_dir->value_column))
            nondet[parse_state(tok, nondet_dir->line, a.num_states)] = true;
    for (AutState q = 0; q < a.num_states; ++q) (nondet[q] ? a.nondet_part : a.det_part).push_back(q);

    for (const auto& e : edges) {
        const AutState src = parse_state(e.src, e.line, a.num_states);
        const AutState dst = parse_state(e.dst, e.line, a.num_states);
        const auto add = [](std::vector<AutState>& v, AutState t) {
            if (std::find(v.begin(), v.end(), t) == v.end()) {
                v.push_back(t);
                std::sort(v.begin(), v.end());
            }
        };
        if (e.letter == "eps") {
            add(a.epsilon_edges[src], dst);
            continue;
        }
        for (PropSet letter : parse_letter(e.letter, e.letter_column, a, e.line)) add(a.delta[src][letter], dst);
    }

    std::sort(a.accepting.begin(), a.accepting.end());
    a.accepting.erase(std::unique(a.accepting.begin(), a.accepting.end()), a.accepting.end());
    complete_with_sink(a);
    if (auto violations = validate_ldba(a); !violations.empty()) throw SemanticError(std::move(violations));
    return a;
}

std::string format_ldba(const Ldba& a) {
    std::ostringstream out;
    out << "ap:";
    for (const auto& p : a.ap) out << ' ' << p;
    out << "\nstates: " << a.num_states << "\ninitial: " << a.initial << "\naccepting:";
    for (AutState q : a.accepting) out << ' ' << q;
    out << "\nnondet:";
    for (AutState q : a.nondet_part) out << ' ' << q;
    out << '\n';
    for (AutState q = 0; q < a.num_states; ++q) {
        for (PropSet letter = 0; letter < a.num_letters(); ++letter)
            for (AutState t : a.delta[q][letter]) out << "edge: " << q << ' ' << format_letter(a, Letter::of(letter)) << ' ' << t << '\n';
        for (AutState t : a.epsilon_edges[q]) out << "edge: " << q << " eps " << t << '\n';
    }
    return out.str();
}

}  // namespace kcq
