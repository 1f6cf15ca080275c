#include "random_models.hpp"

#include <algorithm>
#include <numeric>

namespace kcq::testing {

namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

LabeledMdp random_env(Rng& rng, std::size_t max_states, std::size_t max_actions, const std::vector<std::string>& ap) {
    LabeledMdp m;
    m.num_states = pick(rng, 1, max_states);
    const std::size_t na = pick(rng, 1, max_actions);
    for (std::size_t a = 0; a < na; ++a) m.action_names.push_back("a" + std::to_string(a));
    m.initial = static_cast<EnvState>(pick(rng, 0, m.num_states - 1));
    m.ap = ap;
    m.available.resize(m.num_states);
    m.trans.resize(m.num_states * na);
    for (EnvState s = 0; s < m.num_states; ++s) {
        // Absorbing states make branching irreversible, so optima are not all 0 or 1.
        if (s != m.initial && pick(rng, 0, 1) == 0) {
            const auto a = static_cast<ActionId>(pick(rng, 0, na - 1));
            m.available[s].push_back(a);
            m.trans[s * na + a].push_back({s, 1.0});
            continue;
        }
        for (ActionId a = 0; a < na; ++a)
            if (pick(rng, 0, 2) != 0) m.available[s].push_back(a);
        if (m.available[s].empty()) m.available[s].push_back(static_cast<ActionId>(pick(rng, 0, na - 1)));
        for (ActionId a : m.available[s]) {
            std::vector<EnvState> targets(m.num_states);
            std::iota(targets.begin(), targets.end(), EnvState{0});
            std::shuffle(targets.begin(), targets.end(), rng);
            targets.resize(pick(rng, 1, m.num_states));
            std::sort(targets.begin(), targets.end());
            std::vector<double> w(targets.size());
            for (auto& x : w) x = static_cast<double>(pick(rng, 1, 4));
            const double total = std::accumulate(w.begin(), w.end(), 0.0);
            auto& out = m.trans[s * na + a];
            double used = 0.0;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const double p = i + 1 == targets.size() ? 1.0 - used : w[i] / total;
                used += p;
                out.push_back({targets[i], p});
            }
        }
    }
    m.labels.resize(m.num_states);
    for (auto& l : m.labels) l = static_cast<PropSet>(pick(rng, 0, (std::size_t{1} << ap.size()) - 1));
    return m;
}

Ldba random_ldba(Rng& rng, std::size_t max_states, const std::vector<std::string>& ap) {
    // One declared state cannot accept anything (q0 must be in Q_N), so start at two.
    const std::size_t n = pick(rng, std::min<std::size_t>(2, max_states), max_states);
    Ldba a = Ldba::with_states(ap, n);
    a.initial = 0;
    a.nondet_part.push_back(0);
    // The last state is always deterministic, so Q_D is empty only for n = 1.
    for (AutState q = 1; q < n; ++q) (q + 1 == n || pick(rng, 0, 4) < 3 ? a.det_part : a.nondet_part).push_back(q);
    for (AutState q : a.det_part)
        if (pick(rng, 0, 2) != 0) a.accepting.push_back(q);
    if (a.accepting.empty() && !a.det_part.empty()) a.accepting.push_back(a.det_part.back());
    for (AutState q = 0; q < n; ++q) {
        const bool nondet = a.is_nondet(q);
        const auto& pool = nondet ? a.nondet_part : a.det_part;
        // Missing letters go to the sink; keep them rare so acceptance stays possible.
        for (PropSet l = 0; l < a.num_letters(); ++l)
            if (pick(rng, 0, 7) != 0) a.delta[q][l].push_back(pool[pick(rng, 0, pool.size() - 1)]);
        if (nondet)
            for (AutState t : a.det_part)
                if (pick(rng, 0, 1)) a.epsilon_edges[q].push_back(t);
    }
    // Give the initial state at least one jump into the deterministic part.
    if (!a.det_part.empty() && a.epsilon_edges[0].empty())
        a.epsilon_edges[0].push_back(a.det_part[pick(rng, 0, a.det_part.size() - 1)]);
    complete_with_sink(a);
    return a;
}

std::size_t for_each_policy(const ProductMdp& p, const std::function<void(const Policy&)>& visit) {
    const std::size_t nq = p.num_aut_states();
    const std::size_t pairs = p.num_env_states() * nq;
    std::vector<int> assigned(pairs, -1);  // index into available()
    std::size_t count = 0;

    const auto action_at = [&](std::size_t key) {
        const auto avail = p.available(static_cast<EnvState>(key / nq), static_cast<AutState>(key % nq));
        return p.action_of(avail[static_cast<std::size_t>(std::max(assigned[key], 0))]);
    };

    // First pair reached under the partial policy that has no choice yet.
    const auto frontier = [&]() -> std::ptrdiff_t {
        std::vector<char> seen(pairs, 0);
        const auto start = p.initial_state();
        std::vector<std::size_t> queue{start.s * nq + start.q};
        seen[queue[0]] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t key = queue[head];
            if (assigned[key] < 0) return static_cast<std::ptrdiff_t>(key);
            const EnvState s = static_cast<EnvState>(key / nq);
            const AutState q = static_cast<AutState>(key % nq);
            const auto act = action_at(key);
            std::vector<std::size_t> next;
            if (act.is_epsilon()) {
                next.push_back(s * nq + act.id);
            } else {
                const AutState q2 = p.next_aut(q, s);
                for (const auto& o : p.env().outcomes(s, act.id)) next.push_back(o.next * nq + q2);
            }
            for (auto k : next)
                if (!seen[k]) seen[k] = 1, queue.push_back(k);
        }
        return -1;
    };

    const std::function<void()> rec = [&] {
        const auto key = frontier();
        if (key < 0) {
            Policy pi{nq, std::vector<ProductAction>(pairs)};
            for (std::size_t k = 0; k < pairs; ++k) pi.choice[k] = action_at(k);
            ++count;
            visit(pi);
            return;
        }
        const auto k = static_cast<std::size_t>(key);
        const auto n = p.available(static_cast<EnvState>(k / nq), static_cast<AutState>(k % nq)).size();
        for (std::size_t i = 0; i < n; ++i) {
            assigned[k] = static_cast<int>(i);
            rec();
        }
        assigned[k] = -1;
    };
    rec();
    return count;
}

}  // namespace kcq::testing
