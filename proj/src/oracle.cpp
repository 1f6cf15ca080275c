#include "kcq/oracle.hpp"
#include "kcq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace kcq {

namespace {

struct Act {
    ProductAction label;
    std::vector<std::pair<std::uint32_t, double>> succ;
};

struct Explicit {
    std::size_t nQ = 0;
    std::vector<std::vector<Act>> acts;  // per node s * nQ + q
    std::vector<std::uint8_t> accepting;
    std::uint32_t start = 0;
};

Explicit build(const LabeledMdp& env, const Ldba& aut) {
    if (auto v = validate_ldba(aut); !v.empty()) throw SemanticError(std::move(v));
    std::vector<std::size_t> bit(aut.ap.size());
    for (std::size_t i = 0; i < aut.ap.size(); ++i) {
        const auto it = std::find(env.ap.begin(), env.ap.end(), aut.ap[i]);
        if (it == env.ap.end()) throw Error("proposition mismatch: '" + aut.ap[i] + "' is not an environment label");
        bit[i] = static_cast<std::size_t>(it - env.ap.begin());
    }
    Explicit x;
    x.nQ = aut.num_states;
    x.acts.resize(env.num_states * x.nQ);
    x.accepting.assign(x.acts.size(), 0);
    for (EnvState s = 0; s < env.num_states; ++s) {
        PropSet letter = 0;
        for (std::size_t i = 0; i < bit.size(); ++i)
            if (env.labels[s] >> bit[i] & 1U) letter |= PropSet{1} << i;
        for (AutState q = 0; q < x.nQ; ++q) {
            const std::uint32_t v = static_cast<std::uint32_t>(s * x.nQ + q);
            x.accepting[v] = aut.is_accepting(q) ? 1 : 0;
            const auto& succ_q = aut.delta[q][letter];
            if (succ_q.size() != 1) throw Error("automaton is not complete");
            const AutState q2 = succ_q.front();
            for (ActionId a : env.available[s]) {
                Act act{ProductAction::env(a), {}};
                for (const auto& o : env.outcomes(s, a))
                    act.succ.push_back({static_cast<std::uint32_t>(o.next * x.nQ + q2), o.prob});
                x.acts[v].push_back(std::move(act));
            }
            std::vector<AutState> eps = aut.epsilon_edges[q];
            std::sort(eps.begin(), eps.end());
            eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
            for (AutState t : eps)
                x.acts[v].push_back({ProductAction::epsilon(t), {{static_cast<std::uint32_t>(s * x.nQ + t), 1.0}}});
        }
    }
    x.start = static_cast<std::uint32_t>(env.initial * x.nQ + aut.initial);
    return x;
}

/// Kosaraju SCCs over alive nodes using allowed actions. Returns a component id per node (-1 when dead).
std::vector<std::int64_t> kosaraju(const Explicit& x, const std::vector<std::uint8_t>& alive,
                                   const std::vector<std::vector<std::uint8_t>>& allowed) {
    const std::size_t n = x.acts.size();
    std::vector<std::vector<std::uint32_t>> fwd(n), rev(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        for (std::size_t i = 0; i < x.acts[v].size(); ++i) {
            if (!allowed[v][i]) continue;
            for (const auto& [t, p] : x.acts[v][i].succ) {
                (void)p;
                if (!alive[t]) continue;
                fwd[v].push_back(t);
                rev[t].push_back(v);
            }
        }
    }
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::uint32_t> finish;
    for (std::uint32_t root = 0; root < n; ++root) {
        if (!alive[root] || seen[root]) continue;
        std::vector<std::pair<std::uint32_t, std::size_t>> st{{root, 0}};
        seen[root] = 1;
        while (!st.empty()) {
            auto& [v, pos] = st.back();
            if (pos < fwd[v].size()) {
                const std::uint32_t w = fwd[v][pos++];
                if (!seen[w]) {
                    seen[w] = 1;
                    st.push_back({w, 0});
                }
            } else {
                finish.push_back(v);
                st.pop_back();
            }
        }
    }
    std::vector<std::int64_t> comp(n, -1);
    std::int64_t next = 0;
    for (auto it = finish.rbegin(); it != finish.rend(); ++it) {
        if (comp[*it] >= 0) continue;
        std::vector<std::uint32_t> st{*it};
        comp[*it] = next;
        while (!st.empty()) {
            const std::uint32_t v = st.back();
            st.pop_back();
            for (std::uint32_t w : rev[v])
                if (comp[w] < 0) {
                    comp[w] = next;
                    st.push_back(w);
                }
        }
        ++next;
    }
    return comp;
}

struct MecData {
    std::vector<std::vector<std::uint32_t>> groups;
    std::vector<std::vector<std::uint8_t>> allowed;
    std::vector<std::uint8_t> alive;
};

MecData decompose(const Explicit& x) {
    const std::size_t n = x.acts.size();
    MecData d;
    d.alive.assign(n, 1);
    d.allowed.resize(n);
    for (std::size_t v = 0; v < n; ++v) d.allowed[v].assign(x.acts[v].size(), 1);
    std::vector<std::int64_t> comp;
    for (bool changed = true; changed;) {
        changed = false;
        comp = kosaraju(x, d.alive, d.allowed);
        for (std::size_t v = 0; v < n; ++v) {
            if (!d.alive[v]) continue;
            bool any = false;
            for (std::size_t i = 0; i < x.acts[v].size(); ++i) {
                if (!d.allowed[v][i]) continue;
                for (const auto& [t, p] : x.acts[v][i].succ) {
                    (void)p;
                    if (!d.alive[t] || comp[t] != comp[v]) {
                        d.allowed[v][i] = 0;
                        changed = true;
                        break;
                    }
                }
                any = any || d.allowed[v][i];
            }
            if (!any) {
                d.alive[v] = 0;
                changed = true;
            }
        }
    }
    std::map<std::int64_t, std::vector<std::uint32_t>> by_comp;
    for (std::uint32_t v = 0; v < n; ++v)
        if (d.alive[v]) by_comp[comp[v]].push_back(v);
    for (auto& [c, members] : by_comp) d.groups.push_back(std::move(members));
    return d;
}

double action_value(const Act& a, const std::vector<double>& x) {
    double acc = 0.0;
    for (const auto& [t, p] : a.succ) acc += p * x[t];
    return acc;
}

}  // namespace

EndComponentReport max_end_components(const LabeledMdp& env, const Ldba& aut) {
    const Explicit x = build(env, aut);
    const MecData d = decompose(x);
    EndComponentReport report;
    for (const auto& group : d.groups) {
        EndComponent ec;
        for (std::uint32_t v : group) {
            MecMember m{static_cast<EnvState>(v / x.nQ), static_cast<AutState>(v % x.nQ), {}};
            for (std::size_t i = 0; i < x.acts[v].size(); ++i)
                if (d.allowed[v][i]) m.actions.push_back(x.acts[v][i].label);
            ec.accepting = ec.accepting || x.accepting[v];
            ec.members.push_back(std::move(m));
        }
        report.mecs.push_back(std::move(ec));
    }
    return report;
}

OracleResult solve_optimal(const LabeledMdp& env, const Ldba& aut, double tol) {
    if (!(tol > 0.0)) throw Error("tolerance must be positive");
    const Explicit x = build(env, aut);
    const MecData d = decompose(x);
    const std::size_t n = x.acts.size();

    OracleResult out;
    std::vector<std::uint8_t> target(n, 0);
    std::vector<std::int64_t> mec_of(n, -1);
    for (std::size_t g = 0; g < d.groups.size(); ++g) {
        EndComponent ec;
        for (std::uint32_t v : d.groups[g]) {
            mec_of[v] = static_cast<std::int64_t>(g);
            MecMember m{static_cast<EnvState>(v / x.nQ), static_cast<AutState>(v % x.nQ), {}};
            for (std::size_t i = 0; i < x.acts[v].size(); ++i)
                if (d.allowed[v][i]) m.actions.push_back(x.acts[v][i].label);
            ec.accepting = ec.accepting || x.accepting[v];
            ec.members.push_back(std::move(m));
        }
        if (ec.accepting)
            for (std::uint32_t v : d.groups[g]) target[v] = 1;
        out.mecs.mecs.push_back(std::move(ec));
    }

    // Nodes that can reach the target at all.
    std::vector<std::vector<std::uint32_t>> pred(n);
    for (std::uint32_t v = 0; v < n; ++v)
        for (const auto& a : x.acts[v])
            for (const auto& [t, p] : a.succ) {
                (void)p;
                pred[t].push_back(v);
            }
    std::vector<std::uint8_t> can(n, 0);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t v = 0; v < n; ++v)
        if (target[v]) can[v] = 1, queue.push_back(v);
    while (!queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (std::uint32_t u : pred[v])
            if (!can[u]) can[u] = 1, queue.push_back(u);
    }

    // Max-reachability value iteration from zero (Gauss-Seidel sweeps, monotone).
    std::vector<double> val(n, 0.0);
    for (std::uint32_t v = 0; v < n; ++v)
        if (target[v]) val[v] = 1.0;
    for (std::size_t iter = 1;; ++iter) {
        double delta = 0.0;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (target[v] || !can[v]) continue;
            double best = 0.0;
            for (const auto& a : x.acts[v]) best = std::max(best, action_value(a, val));
            delta = std::max(delta, best - val[v]);
            val[v] = best;
        }
        out.iterations = iter;
        if (delta < tol || iter >= 50'000'000) break;
    }
    out.values = val;
    out.vi_probability = val[x.start];

    // Witness policy: inside accepting MECs steer toward accepting nodes with
    // MEC-internal actions; elsewhere follow optimal actions that make progress
    // toward the target.
    std::vector<std::int64_t> choice(n, -1);
    std::vector<std::uint8_t> done(n, 0);
    for (std::size_t g = 0; g < d.groups.size(); ++g) {
        if (!out.mecs.mecs[g].accepting) continue;
        const auto& group = d.groups[g];
        for (std::uint32_t v : group)
            if (x.accepting[v]) {
                for (std::size_t i = 0; i < x.acts[v].size(); ++i)
                    if (d.allowed[v][i]) {
                        choice[v] = static_cast<std::int64_t>(i);
                        break;
                    }
                done[v] = 1;
            }
        for (bool grew = true; grew;) {
            grew = false;
            for (std::uint32_t v : group) {
                if (done[v]) continue;
                for (std::size_t i = 0; i < x.acts[v].size() && !done[v]; ++i) {
                    if (!d.allowed[v][i]) continue;
                    for (const auto& [t, p] : x.acts[v][i].succ) {
                        (void)p;
                        if (done[t]) {
                            choice[v] = static_cast<std::int64_t>(i);
                            done[v] = 1;
                            grew = true;
                            break;
                        }
                    }
                }
            }
        }
    }
    constexpr double kOptimalSlack = 1e-10;
    for (bool grew = true; grew;) {
        grew = false;
        std::vector<std::uint32_t> layer;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (done[v] || target[v] || !(val[v] > 0.0)) continue;
            for (std::size_t i = 0; i < x.acts[v].size(); ++i) {
                const Act& a = x.acts[v][i];
                if (action_value(a, val) < val[v] - kOptimalSlack) continue;
                const bool progress = std::any_of(a.succ.begin(), a.succ.end(), [&](const auto& e) { return done[e.first] != 0; });
                if (progress) {
                    choice[v] = static_cast<std::int64_t>(i);
                    layer.push_back(v);
                    break;
                }
            }
        }
        for (std::uint32_t v : layer) done[v] = 1;
        grew = !layer.empty();
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        if (choice[v] >= 0) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < x.acts[v].size(); ++i)
            if (action_value(x.acts[v][i], val) > action_value(x.acts[v][best], val)) best = i;
        choice[v] = static_cast<std::int64_t>(best);
    }
    out.witness.num_aut_states = x.nQ;
    out.witness.choice.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) out.witness.choice[v] = x.acts[v][static_cast<std::size_t>(choice[v])].label;

    // Exact value of the witness: linear solve over nodes reachable from the start.
    std::vector<std::int64_t> local(n, -1);
    std::vector<std::uint32_t> reach{x.start};
    local[x.start] = 0;
    for (std::size_t i = 0; i < reach.size(); ++i)
        for (const auto& [t, p] : x.acts[reach[i]][static_cast<std::size_t>(choice[reach[i]])].succ) {
            (void)p;
            if (local[t] < 0) {
                local[t] = static_cast<std::int64_t>(reach.size());
                reach.push_back(t);
            }
        }
    // Under the witness, accepting-MEC nodes never leave their MEC and keep visiting accepting nodes.
    std::vector<std::uint8_t> pos(reach.size(), 0);
    std::vector<std::vector<std::uint32_t>> rpred(reach.size());
    std::deque<std::uint32_t> q2;
    for (std::uint32_t i = 0; i < reach.size(); ++i) {
        for (const auto& [t, p] : x.acts[reach[i]][static_cast<std::size_t>(choice[reach[i]])].succ) {
            (void)p;
            rpred[static_cast<std::size_t>(local[t])].push_back(i);
        }
        if (target[reach[i]]) pos[i] = 1, q2.push_back(i);
    }
    while (!q2.empty()) {
        const std::uint32_t i = q2.front();
        q2.pop_front();
        for (std::uint32_t u : rpred[i])
            if (!pos[u]) pos[u] = 1, q2.push_back(u);
    }
    std::vector<std::uint32_t> unknown;
    std::vector<std::int64_t> uidx(reach.size(), -1);
    for (std::uint32_t i = 0; i < reach.size(); ++i)
        if (pos[i] && !target[reach[i]]) {
            uidx[i] = static_cast<std::int64_t>(unknown.size());
            unknown.push_back(i);
        }
    const std::size_t m = unknown.size();
    std::vector<double> A(m * m, 0.0), b(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        A[r * m + r] = 1.0;
        const std::uint32_t v = reach[unknown[r]];
        for (const auto& [t, p] : x.acts[v][static_cast<std::size_t>(choice[v])].succ) {
            const std::size_t li = static_cast<std::size_t>(local[t]);
            if (target[t]) b[r] += p;
            else if (uidx[li] >= 0) A[r * m + static_cast<std::size_t>(uidx[li])] -= p;
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::abs(A[r * m + c]) > std::abs(A[piv * m + c])) piv = r;
        if (piv != c) {
            for (std::size_t k = 0; k < m; ++k) std::swap(A[c * m + k], A[piv * m + k]);
            std::swap(b[c], b[piv]);
        }
        const double dgn = A[c * m + c];
        if (dgn == 0.0) throw Error("oracle linear system is singular");
        for (std::size_t r = c + 1; r < m; ++r) {
            const double f = A[r * m + c] / dgn;
            if (f == 0.0) continue;
            for (std::size_t k = c; k < m; ++k) A[r * m + k] -= f * A[c * m + k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t r = m; r-- > 0;) {
        double acc = b[r];
        for (std::size_t k = r + 1; k < m; ++k) acc -= A[r * m + k] * b[k];
        b[r] = acc / A[r * m + r];
    }
    if (target[x.start]) out.probability = 1.0;
    else if (uidx[0] >= 0) out.probability = std::clamp(b[static_cast<std::size_t>(uidx[0])], 0.0, 1.0);
    else out.probability = 0.0;
    return out;
}

double optimal_satisfaction(const LabeledMdp& env, const Ldba& aut, double tol) {
    return solve_optimal(env, aut, tol).probability;
}

}  // namespace kcq
