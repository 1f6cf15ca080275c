#include "kcq/check.hpp"
#include "kcq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace kcq {

std::optional<NodeId> InducedChain::find(ChainNode n) const {
    for (NodeId i = 0; i < nodes.size(); ++i)
        if (nodes[i] == n) return i;
    return std::nullopt;
}

InducedChain induce_chain(const ProductMdp& product, const Policy& policy) {
    const std::size_t nQ = product.num_aut_states();
    if (policy.num_aut_states != nQ || policy.choice.size() != product.num_env_states() * nQ)
        throw Error("policy shape does not match the product");
    InducedChain chain;
    chain.num_env_states = product.num_env_states();
    chain.num_aut_states = nQ;
    std::vector<std::int64_t> id_of(product.num_env_states() * nQ, -1);
    std::deque<NodeId> queue;

    const auto intern = [&](EnvState s, AutState q) {
        auto& slot = id_of[s * nQ + q];
        if (slot < 0) {
            slot = static_cast<std::int64_t>(chain.nodes.size());
            chain.nodes.push_back({s, q});
            chain.accepting.push_back(product.is_accepting(q) ? 1 : 0);
            queue.push_back(static_cast<NodeId>(slot));
        }
        return static_cast<NodeId>(slot);
    };

    chain.start = intern(product.env().initial, product.aut().initial);
    while (!queue.empty()) {
        const NodeId id = queue.front();
        queue.pop_front();
        const auto [s, q] = chain.nodes[id];
        const ProductAction act = policy.at(s, q);
        if (!product.is_available(s, q, act))
            throw Error("policy selects an unavailable action at node (s=" + std::to_string(s) +
                        ", q=" + std::to_string(q) + ")");
        std::vector<ChainEdge> out;
        if (act.is_epsilon()) {
            out.push_back({intern(s, act.id), 1.0});
        } else {
            const AutState q2 = product.next_aut(q, s);
            for (const auto& o : product.env().outcomes(s, act.id)) out.push_back({intern(o.next, q2), o.prob});
        }
        std::sort(out.begin(), out.end(), [](const ChainEdge& x, const ChainEdge& y) { return x.to < y.to; });
        if (chain.edges.size() <= id) chain.edges.resize(id + 1);
        chain.edges[id] = std::move(out);
        if (chain.epsilon_step.size() <= id) chain.epsilon_step.resize(id + 1);
        chain.epsilon_step[id] = act.is_epsilon() ? 1 : 0;
    }
    chain.edges.resize(chain.nodes.size());
    chain.epsilon_step.resize(chain.nodes.size());
    return chain;
}

InducedChain induce_chain(const LabeledMdp& env, const Ldba& aut, const Policy& policy) {
    return induce_chain(make_product(env, aut, 0, RewardSchedule::constant(0, 1.0), 1.0), policy);
}

namespace {

/// Tarjan's algorithm, iterative. Components come out in reverse topological
/// order: a component is emitted only after every component it can reach.
std::vector<std::vector<NodeId>> tarjan(const InducedChain& chain) {
    const std::size_t n = chain.size();
    constexpr std::uint32_t kUnvisited = ~std::uint32_t{0};
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
    std::vector<std::uint8_t> on_stack(n, 0);
    std::vector<NodeId> stack;
    std::vector<std::pair<NodeId, std::size_t>> call;  // (node, next edge position)
    std::vector<std::vector<NodeId>> comps;
    std::uint32_t counter = 0;

    for (NodeId root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < chain.edges[v].size()) {
                const NodeId w = chain.edges[v][pos++].to;
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const NodeId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                std::vector<NodeId> comp;
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
        }
    }
    return comps;
}

// Dense elimination threshold; larger transient components use Gauss-Seidel.
constexpr std::size_t kDenseLimit = 1500;

void solve_dense(std::vector<double>& A, std::vector<double>& b, std::size_t m) {
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(A[r * m + col]) > std::abs(A[piv * m + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < m; ++c) std::swap(A[col * m + c], A[piv * m + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = A[col * m + col];
        if (d == 0.0) throw Error("singular reachability system");
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = A[r * m + col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < m; ++c) A[r * m + c] -= f * A[col * m + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = m; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < m; ++c) acc -= A[i * m + c] * b[c];
        b[i] = acc / A[i * m + i];
    }
}

}  // namespace

BsccReport bsccs(const InducedChain& chain) {
    BsccReport report;
    report.component_of.assign(chain.size(), -1);
    std::vector<std::int64_t> scc_of(chain.size());
    const auto comps = tarjan(chain);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (NodeId v : comps[c]) scc_of[v] = static_cast<std::int64_t>(c);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        bool bottom = true;
        bool acc = false;
        for (NodeId v : comps[c]) {
            acc = acc || chain.accepting[v];
            for (const auto& e : chain.edges[v])
                if (scc_of[e.to] != static_cast<std::int64_t>(c)) bottom = false;
        }
        if (!bottom) continue;
        const auto id = static_cast<std::int32_t>(report.components.size());
        for (NodeId v : comps[c]) report.component_of[v] = id;
        report.components.push_back(comps[c]);
        report.accepting.push_back(acc ? 1 : 0);
    }
    return report;
}

std::vector<double> acceptance_probabilities(const InducedChain& chain) {
    const std::size_t n = chain.size();
    std::vector<double> value(n, 0.0);
    std::vector<std::int64_t> scc_of(n, -1);
    const auto comps = tarjan(chain);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (NodeId v : comps[c]) scc_of[v] = static_cast<std::int64_t>(c);

    std::vector<std::uint32_t> local(n, 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        const auto& comp = comps[c];
        const auto sc = static_cast<std::int64_t>(c);
        bool bottom = true;
        bool acc = false;
        for (NodeId v : comp) {
            acc = acc || chain.accepting[v];
            for (const auto& e : chain.edges[v])
                if (scc_of[e.to] != sc) bottom = false;
        }
        if (bottom) {
            for (NodeId v : comp) value[v] = acc ? 1.0 : 0.0;
            continue;
        }
        const std::size_t m = comp.size();
        for (std::size_t i = 0; i < m; ++i) local[comp[i]] = static_cast<std::uint32_t>(i);

        // Exit mass into already-solved components.
        std::vector<double> b(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (const auto& e : chain.edges[comp[i]])
                if (scc_of[e.to] != sc) b[i] += e.prob * value[e.to];

        if (m == 1) {
            double self = 0.0;
            for (const auto& e : chain.edges[comp[0]])
                if (e.to == comp[0]) self += e.prob;
            value[comp[0]] = b[0] / (1.0 - self);
        } else if (m <= kDenseLimit) {
            std::vector<double> A(m * m, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                A[i * m + i] += 1.0;
                for (const auto& e : chain.edges[comp[i]])
                    if (scc_of[e.to] == sc) A[i * m + local[e.to]] -= e.prob;
            }
            solve_dense(A, b, m);
            for (std::size_t i = 0; i < m; ++i) value[comp[i]] = b[i];
        } else {
            std::vector<double> x(m, 0.0);
            for (std::size_t iter = 0; iter < 10'000'000; ++iter) {
                double delta = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    double self = 0.0;
                    double acc_v = b[i];
                    for (const auto& e : chain.edges[comp[i]]) {
                        if (scc_of[e.to] != sc) continue;
                        if (e.to == comp[i]) self += e.prob;
                        else acc_v += e.prob * x[local[e.to]];
                    }
                    const double nv = acc_v / (1.0 - self);
                    delta = std::max(delta, std::abs(nv - x[i]));
                    x[i] = nv;
                }
                if (delta < 1e-14) break;
            }
            for (std::size_t i = 0; i < m; ++i) value[comp[i]] = x[i];
        }
        for (NodeId v : comp) value[v] = std::clamp(value[v], 0.0, 1.0);
    }
    return value;
}

double satisfaction_probability(const InducedChain& chain) {
    if (chain.size() == 0) return 0.0;
    return acceptance_probabilities(chain)[chain.start];
}

bool structurally_equal(const InducedChain& a, const InducedChain& b, double tol) {
    if (a.size() != b.size()) return false;
    if (a.size() == 0) return true;
    std::map<ChainNode, NodeId> index_b;
    for (NodeId i = 0; i < b.size(); ++i) index_b[b.nodes[i]] = i;
    const auto to_b = [&](NodeId ia) -> std::optional<NodeId> {
        const auto it = index_b.find(a.nodes[ia]);
        if (it == index_b.end()) return std::nullopt;
        return it->second;
    };
    if (to_b(a.start) != std::optional<NodeId>(b.start)) return false;
    for (NodeId i = 0; i < a.size(); ++i) {
        const auto j = to_b(i);
        if (!j) return false;
        if (a.epsilon_step[i] != b.epsilon_step[*j] || a.accepting[i] != b.accepting[*j]) return false;
        std::vector<std::pair<NodeId, double>> ea;
        for (const auto& e : a.edges[i]) {
            const auto t = to_b(e.to);
            if (!t) return false;
            ea.push_back({*t, e.prob});
        }
        std::sort(ea.begin(), ea.end());
        const auto& eb = b.edges[*j];
        if (ea.size() != eb.size()) return false;
        for (std::size_t k = 0; k < ea.size(); ++k)
            if (ea[k].first != eb[k].to || std::abs(ea[k].second - eb[k].prob) > tol) return false;
    }
    return true;
}

}  // namespace kcq
