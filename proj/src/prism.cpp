#include "kcq/check.hpp"
#include "kcq/errors.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <regex>

namespace kcq {

LabelMap label_map_of(const LabeledMdp& env) {
    LabelMap out;
    for (std::size_t i = 0; i < env.ap.size(); ++i) {
        std::vector<EnvState> states;
        for (EnvState s = 0; s < env.num_states; ++s)
            if (env.labels[s] >> i & 1U) states.push_back(s);
        out.emplace_back(env.ap[i], std::move(states));
    }
    return out;
}

namespace {

std::string prob_literal(double p) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, p);
    return std::string(buf, res.ptr);
}

std::string guard(std::uint32_t m, std::uint32_t a) {
    return "(m=" + std::to_string(m) + ")&(a=" + std::to_string(a) + ")";
}

std::string target(std::uint32_t m, std::uint32_t a) {
    return "(m'=" + std::to_string(m) + ")&(a'=" + std::to_string(a) + ")";
}

}  // namespace

std::string export_prism(const InducedChain& chain, const LabelMap& labels) {
    if (chain.size() == 0) throw Error("cannot export an empty chain");
    constexpr std::size_t kMaxIndex = 0x7fffffff;
    if (chain.num_env_states > kMaxIndex || chain.num_aut_states > kMaxIndex)
        throw Error("chain too large for the integer encoding");

    std::vector<NodeId> order(chain.size());
    for (NodeId i = 0; i < chain.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](NodeId x, NodeId y) { return chain.nodes[x] < chain.nodes[y]; });

    const ChainNode start = chain.nodes[chain.start];
    std::string out = "dtmc\n";
    out += "// m: environment state id, a: automaton state id\n";
    out += "module ProductMDP\n";
    out += "    m : [0.." + std::to_string(chain.num_env_states) + "] init " + std::to_string(start.s) + ";\n";
    out += "    a : [0.." + std::to_string(chain.num_aut_states) + "] init " + std::to_string(start.q) + ";\n";
    for (NodeId v : order) {
        const ChainNode n = chain.nodes[v];
        if (chain.epsilon_step[v]) {
            const ChainNode t = chain.nodes[chain.edges[v].front().to];
            out += "    [ep] " + guard(n.s, n.q) + " -> " + target(t.s, t.q) + ";\n";
            continue;
        }
        out += "    [ac] " + guard(n.s, n.q) + " -> ";
        bool first = true;
        for (const auto& e : chain.edges[v]) {
            if (!first) out += " + ";
            first = false;
            const ChainNode t = chain.nodes[e.to];
            out += prob_literal(e.prob) + " : " + target(t.s, t.q);
        }
        out += ";\n";
    }
    out += "endmodule\n\n";
    for (const auto& [name, states] : labels) {
        out += "label \"" + name + "\" = ";
        if (states.empty()) out += "false";
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (i) out += " | ";
            out += "(m=" + std::to_string(states[i]) + ")";
        }
        out += ";\n";
    }
    return out;
}

namespace {

std::uint32_t to_u32(const std::string& s, std::size_t line) {
    std::uint32_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("bad integer '" + s + "'", line, 1);
    return v;
}

double to_prob(const std::string& s, std::size_t line) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("bad probability '" + s + "'", line, 1);
    return v;
}

}  // namespace

PrismModel parse_prism(std::string_view text) {
    static const std::regex var_re(R"(^(m|a)\s*:\s*\[0\.\.(\d+)\]\s*init\s+(\d+)\s*;$)");
    static const std::regex cmd_re(R"(^\[(\w+)\]\s*\(m=(\d+)\)&\(a=(\d+)\)\s*->\s*(.*);$)");
    static const std::regex upd_re(R"(^(?:([0-9eE.+-]+)\s*:\s*)?\(m'=(\d+)\)&\(a'=(\d+)\)$)");
    static const std::regex label_re(R"re(^label\s+"([^"]+)"\s*=\s*(.*);$)re");
    static const std::regex atom_re(R"(^\(m=(\d+)\)$)");

    PrismModel model;
    enum class Stage { Header, Module, Body, Labels } stage = Stage::Header;
    bool have_m = false, have_a = false;
    std::size_t line_no = 0;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        std::string line(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (const auto c = line.find("//"); c != std::string::npos) line.erase(c);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);

        std::smatch mt;
        switch (stage) {
            case Stage::Header:
                if (line != "dtmc") throw ParseError("expected 'dtmc'", line_no, 1);
                stage = Stage::Module;
                break;
            case Stage::Module:
                if (line.rfind("module ", 0) != 0) throw ParseError("expected 'module'", line_no, 1);
                stage = Stage::Body;
                break;
            case Stage::Body:
                if (line == "endmodule") {
                    stage = Stage::Labels;
                } else if (std::regex_match(line, mt, var_re)) {
                    const std::uint32_t hi = to_u32(mt[2], line_no), init = to_u32(mt[3], line_no);
                    if (mt[1] == "m") {
                        model.m_max = hi, model.m_init = init, have_m = true;
                    } else {
                        model.a_max = hi, model.a_init = init, have_a = true;
                    }
                } else if (std::regex_match(line, mt, cmd_re)) {
                    PrismCommand cmd{mt[1], to_u32(mt[2], line_no), to_u32(mt[3], line_no), {}};
                    std::string ups = mt[4];
                    std::size_t pos = 0;
                    while (true) {
                        const auto plus = ups.find(" + ", pos);
                        std::string part = ups.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
                        std::smatch um;
                        const auto pb = part.find_first_not_of(' ');
                        part = pb == std::string::npos ? "" : part.substr(pb, part.find_last_not_of(' ') - pb + 1);
                        if (!std::regex_match(part, um, upd_re)) throw ParseError("malformed update '" + part + "'", line_no, 1);
                        const double p = um[1].matched ? to_prob(um[1], line_no) : 1.0;
                        cmd.updates.push_back({p, {to_u32(um[2], line_no), to_u32(um[3], line_no)}});
                        if (plus == std::string::npos) break;
                        pos = plus + 3;
                    }
                    model.commands.push_back(std::move(cmd));
                } else {
                    throw ParseError("unrecognized module line", line_no, 1);
                }
                break;
            case Stage::Labels: {
                if (!std::regex_match(line, mt, label_re)) throw ParseError("expected a label", line_no, 1);
                std::vector<std::uint32_t> states;
                const std::string body = mt[2];
                if (body != "false") {
                    std::size_t pos = 0;
                    while (true) {
                        const auto bar = body.find('|', pos);
                        std::string atom = body.substr(pos, bar == std::string::npos ? std::string::npos : bar - pos);
                        atom.erase(std::remove(atom.begin(), atom.end(), ' '), atom.end());
                        std::smatch am;
                        if (!std::regex_match(atom, am, atom_re)) throw ParseError("malformed label atom", line_no, 1);
                        states.push_back(to_u32(am[1], line_no));
                        if (bar == std::string::npos) break;
                        pos = bar + 1;
                    }
                }
                model.labels.emplace_back(mt[1], std::move(states));
                break;
            }
        }
    }
    if (stage != Stage::Labels) throw ParseError("missing 'endmodule'", line_no, 1);
    if (!have_m || !have_a) throw ParseError("missing variable declaration", line_no, 1);
    return model;
}

InducedChain chain_from_prism(const PrismModel& model, std::span<const AutState> accepting) {
    InducedChain chain;
    chain.num_env_states = model.m_max;
    chain.num_aut_states = model.a_max;
    std::map<ChainNode, NodeId> id_of;
    for (const auto& cmd : model.commands) {
        const ChainNode n{cmd.m, cmd.a};
        if (!id_of.emplace(n, static_cast<NodeId>(chain.nodes.size())).second)
            throw Error("duplicate command for (m=" + std::to_string(cmd.m) + ", a=" + std::to_string(cmd.a) + ")");
        chain.nodes.push_back(n);
        chain.epsilon_step.push_back(cmd.tag == "ep" ? 1 : 0);
        chain.accepting.push_back(std::find(accepting.begin(), accepting.end(), cmd.a) != accepting.end() ? 1 : 0);
    }
    chain.edges.resize(chain.nodes.size());
    for (std::size_t i = 0; i < model.commands.size(); ++i) {
        std::map<NodeId, double> merged;
        for (const auto& [p, t] : model.commands[i].updates) {
            const auto it = id_of.find({t.first, t.second});
            if (it == id_of.end()) throw Error("update targets a state without a command");
            merged[it->second] += p;
        }
        for (const auto& [to, p] : merged) chain.edges[i].push_back({to, p});
    }
    const auto it = id_of.find({model.m_init, model.a_init});
    if (it == id_of.end()) throw Error("initial state has no command");
    chain.start = it->second;
    return chain;
}

}  // namespace kcq
