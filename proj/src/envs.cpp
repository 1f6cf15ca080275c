#include "kcq/envs.hpp"
#include "kcq/errors.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace kcq {

bool LabeledMdp::is_available(EnvState s, ActionId a) const {
    if (s >= num_states || a >= num_actions()) return false;
    const auto& avail = available[s];
    return std::binary_search(avail.begin(), avail.end(), a);
}

double LabeledMdp::min_probability() const {
    double p_min = 1.0;
    for (const auto& row : trans)
        for (const auto& o : row)
            if (o.prob > 0) p_min = std::min(p_min, o.prob);
    return p_min;
}

std::vector<std::string> audit_mdp(const LabeledMdp& m) {
    std::vector<std::string> issues;
    if (m.num_states == 0) issues.push_back("MDP has no states");
    if (m.initial >= m.num_states) issues.push_back("initial state out of range");
    if (m.available.size() != m.num_states) issues.push_back("availability table size mismatch");
    if (m.labels.size() != m.num_states) issues.push_back("label table size mismatch");
    if (m.trans.size() != m.num_states * m.num_actions()) issues.push_back("transition table size mismatch");
    if (!issues.empty()) return issues;

    const PropSet label_mask = m.ap.size() >= 32 ? ~PropSet{0} : ((PropSet{1} << m.ap.size()) - 1);
    for (EnvState s = 0; s < m.num_states; ++s) {
        const std::string where = "state " + std::to_string(s);
        if (m.available[s].empty()) issues.push_back(where + " has no available action");
        if ((m.labels[s] & ~label_mask) != 0) issues.push_back(where + " has a label outside ap");
        for (ActionId a = 0; a < m.num_actions(); ++a) {
            const auto out = m.outcomes(s, a);
            const bool avail = m.is_available(s, a);
            if (!avail) {
                if (!out.empty()) issues.push_back(where + " has transitions for unavailable action " + std::to_string(a));
                continue;
            }
            double sum = 0.0;
            std::set<EnvState> seen;
            for (const auto& o : out) {
                if (!(o.prob > 0.0)) issues.push_back(where + " action " + std::to_string(a) + " has a non-positive probability");
                if (o.next >= m.num_states) issues.push_back(where + " action " + std::to_string(a) + " leads outside S");
                if (!seen.insert(o.next).second) issues.push_back(where + " action " + std::to_string(a) + " lists a successor twice");
                sum += o.prob;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                issues.push_back(where + " action " + std::to_string(a) + " probabilities sum to " + std::to_string(sum));
        }
    }
    return issues;
}

EnvState sample_transition(const LabeledMdp& m, EnvState s, ActionId a, Rng& rng) {
    if (!m.is_available(s, a))
        throw Error("action " + std::to_string(a) + " is not available at state " + std::to_string(s));
    const auto out = m.outcomes(s, a);
    if (out.size() == 1) return out.front().next;
    const double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& o : out) {
        acc += o.prob;
        if (u < acc) return o.next;
    }
    return out.back().next;
}

namespace {

LabeledMdp load_generic_mdp(const std::vector<text::Directive>& dirs) {
    std::optional<std::size_t> num_states;
    EnvState initial = 0;
    std::vector<std::string> action_names;
    std::vector<std::string> ap;
    struct RawEdge {
        std::size_t line;
        std::vector<text::Token> toks;
    };
    std::vector<RawEdge> edges;
    std::vector<RawEdge> labels;

    for (const auto& d : dirs) {
        const auto toks = text::tokenize(d.value, d.value_column);
        if (d.key == "states") {
            if (toks.size() != 1) throw ParseError("expected a single state count", d.line, d.value_column);
            const long long n = text::parse_int(toks[0], d.line);
            if (n <= 0) throw ParseError("MDP must have at least one state", d.line, toks[0].column);
            num_states = static_cast<std::size_t>(n);
        } else if (d.key == "initial") {
            if (toks.size() != 1) throw ParseError("expected a single initial state", d.line, d.value_column);
            const long long v = text::parse_int(toks[0], d.line);
            if (v < 0) throw ParseError("negative state id", d.line, toks[0].column);
            initial = static_cast<EnvState>(v);
        } else if (d.key == "actions") {
            for (const auto& t : toks) action_names.emplace_back(t.text);
        } else if (d.key == "ap") {
            for (const auto& t : toks) ap.emplace_back(t.text);
        } else if (d.key == "edge") {
            if (toks.size() != 4) throw ParseError("expected 'edge: s a s' p'", d.line, d.value_column);
            edges.push_back({d.line, toks});
        } else if (d.key == "label") {
            if (toks.empty()) throw ParseError("expected 'label: s {props}'", d.line, d.value_column);
            labels.push_back({d.line, toks});
        } else {
            throw ParseError("unknown directive '" + std::string(d.key) + "'", d.line, d.key_column);
        }
    }
    if (!num_states) throw ParseError("missing 'states' directive", dirs.empty() ? 1 : dirs.back().line, 1);

    const auto state_id = [&](const text::Token& t, std::size_t line) {
        const long long v = text::parse_int(t, line);
        if (v < 0 || static_cast<std::size_t>(v) >= *num_states)
            throw ParseError("state id " + std::string(t.text) + " out of range", line, t.column);
        return static_cast<EnvState>(v);
    };
    const auto action_id = [&](const text::Token& t, std::size_t line) -> ActionId {
        const auto it = std::find(action_names.begin(), action_names.end(), t.text);
        if (it != action_names.end()) return static_cast<ActionId>(it - action_names.begin());
        const long long v = text::parse_int(t, line);
        if (v < 0) throw ParseError("negative action id", line, t.column);
        return static_cast<ActionId>(v);
    };

    std::map<std::pair<EnvState, ActionId>, std::map<EnvState, double>> rows;
    ActionId max_action = 0;
    for (const auto& e : edges) {
        const EnvState s = state_id(e.toks[0], e.line);
        const ActionId a = action_id(e.toks[1], e.line);
        const EnvState t = state_id(e.toks[2], e.line);
        const double p = text::parse_double(e.toks[3], e.line);
        if (!(p > 0.0) || p > 1.0) throw ParseError("probability must be in (0,1]", e.line, e.toks[3].column);
        rows[{s, a}][t] += p;
        max_action = std::max(max_action, a);
    }
    if (action_names.empty()) {
        for (ActionId a = 0; a <= max_action; ++a) action_names.push_back("a" + std::to_string(a));
    } else if (max_action >= action_names.size()) {
        throw ParseError("action id beyond declared actions", edges.front().line, 1);
    }

    LabeledMdp m;
    m.num_states = *num_states;
    if (initial >= m.num_states) throw ParseError("initial state out of range", 1, 1);
    m.initial = initial;
    m.action_names = action_names;
    m.available.assign(m.num_states, {});
    m.trans.assign(m.num_states * m.num_actions(), {});
    for (const auto& [key, dist] : rows) {
        auto& row = m.trans[key.first * m.num_actions() + key.second];
        for (const auto& [t, p] : dist) row.push_back({t, p});
        m.available[key.first].push_back(key.second);
    }
    for (EnvState s = 0; s < m.num_states; ++s) {
        if (m.available[s].empty()) {  // self-loop completion
            m.available[s].push_back(0);
            m.trans[s * m.num_actions()].push_back({s, 1.0});
        }
        std::sort(m.available[s].begin(), m.available[s].end());
    }

    m.labels.assign(m.num_states, 0);
    for (const auto& l : labels) {
        const EnvState s = state_id(l.toks[0], l.line);
        std::string body;
        for (std::size_t i = 1; i < l.toks.size(); ++i) body += l.toks[i].text;
        if (body.size() < 2 || body.front() != '{' || body.back() != '}')
            throw ParseError("expected '{props}'", l.line, l.toks.size() > 1 ? l.toks[1].column : l.toks[0].column);
        body = body.substr(1, body.size() - 2);
        std::size_t pos = 0;
        while (!body.empty() && pos <= body.size()) {
            const auto comma = body.find(',', pos);
            const std::string name = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            auto it = std::find(ap.begin(), ap.end(), name);
            if (it == ap.end()) {
                ap.push_back(name);
                it = ap.end() - 1;
            }
            m.labels[s] |= PropSet{1} << (it - ap.begin());
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (ap.size() > kMaxPropositions) throw Error("too many atomic propositions");
    m.ap = ap;

    if (auto issues = audit_mdp(m); !issues.empty()) throw SemanticError(std::move(issues));
    return m;
}

}  // namespace

LabeledMdp load_mdp(std::string_view config_text) {
    const auto dirs = text::directives(config_text);
    if (dirs.empty()) throw ParseError("empty MDP config", 1, 1);
    const bool is_grid = std::any_of(dirs.begin(), dirs.end(), [](const auto& d) { return d.key == "grid"; });
    if (is_grid) return build_grid(parse_grid_spec(config_text));
    return load_generic_mdp(dirs);
}

}  // namespace kcq
