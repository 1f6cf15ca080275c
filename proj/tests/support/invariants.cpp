#include "invariants.hpp"
#include "random_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace kcq::testing {

namespace {

std::string at(const ProductState& st, ProductAction a) {
    std::ostringstream os;
    os << "(s=" << st.s << ",q=" << st.q << ",n=" << st.n << ") " << (a.is_epsilon() ? "eps" : "a") << a.id;
    return os.str();
}

double expected_reward(const ProductMdp& p, std::uint32_t n_next) {
    return p.schedule().reward(p.K() == 0 ? 0 : n_next);
}

void check_transition(const ProductMdp& p, const ProductState& st, ProductAction act, EnvState env_next,
                      const StepResult& r, std::vector<std::string>& out) {
    const AutState q2 = act.is_epsilon() ? act.id : p.aut().delta[st.q][p.letter(st.s)].front();
    const bool acc = p.aut().is_accepting(q2);
    // Epsilon moves keep the counter but are still rewarded as a visit.
    const std::uint32_t visit = std::min(st.n + 1, p.K());
    const std::uint32_t n2 = acc && !act.is_epsilon() ? visit : st.n;
    const EnvState s2 = act.is_epsilon() ? st.s : env_next;
    if (r.next != ProductState{s2, q2, n2}) out.push_back("wrong successor at " + at(st, act));
    const double reward = acc ? expected_reward(p, visit) : 0.0;
    if (r.reward != reward) out.push_back("wrong reward at " + at(st, act));
    const double discount = reward > 0 ? 1.0 - reward : p.gamma();
    if (r.discount != discount) out.push_back("wrong discount at " + at(st, act));
}

}  // namespace

std::vector<std::string> product_violations(const ProductMdp& p) {
    std::vector<std::string> out;
    const auto states = p.enumerate_reachable();
    if (states.empty() || states.front() != ProductState{p.env().initial, p.aut().initial, 0})
        out.push_back("enumeration does not start at the initial state");
    for (const auto& st : states) {
        if (st.n > p.K()) out.push_back("counter above K");
        const auto avail = p.available(st.s, st.q);
        // Availability: env actions of s, then epsilon targets of q.
        std::vector<Slot> expect;
        for (ActionId a : p.env().available[st.s]) expect.push_back(p.slot_of(ProductAction::env(a)));
        auto eps = p.aut().epsilon_edges[st.q];
        std::sort(eps.begin(), eps.end());
        for (AutState t : eps) expect.push_back(p.slot_of(ProductAction::epsilon(t)));
        if (!std::equal(avail.begin(), avail.end(), expect.begin(), expect.end()))
            out.push_back("availability mismatch at (s=" + std::to_string(st.s) + ",q=" + std::to_string(st.q) + ")");

        for (Slot slot : avail) {
            const ProductAction act = p.action_of(slot);
            const auto succ = p.successors(st, act);
            double total = 0.0;
            for (const auto& [r, prob] : succ) {
                total += prob;
                if (!(prob > 0.0)) out.push_back("non-positive probability at " + at(st, act));
            }
            if (std::abs(total - 1.0) > 1e-12) out.push_back("probabilities do not sum to 1 at " + at(st, act));
            if (act.is_epsilon()) {
                if (succ.size() != 1 || succ[0].second != 1.0) out.push_back("epsilon move not deterministic at " + at(st, act));
                for (const auto& [r, prob] : succ) check_transition(p, st, act, st.s, r, out);
            } else {
                const auto outcomes = p.env().outcomes(st.s, act.id);
                if (succ.size() != outcomes.size()) out.push_back("successor count mismatch at " + at(st, act));
                for (std::size_t i = 0; i < std::min(succ.size(), outcomes.size()); ++i) {
                    if (succ[i].second != outcomes[i].prob) out.push_back("probability mismatch at " + at(st, act));
                    check_transition(p, st, act, outcomes[i].next, succ[i].first, out);
                }
            }

            // Counter independence of the (s, q) marginal.
            const auto marginal = [&](std::uint32_t n) {
                std::map<std::pair<EnvState, AutState>, double> m;
                for (const auto& [r, prob] : p.successors({st.s, st.q, n}, act)) m[{r.next.s, r.next.q}] += prob;
                return m;
            };
            const auto base = marginal(0);
            for (std::uint32_t n = 1; n <= p.K(); ++n)
                if (marginal(n) != base) out.push_back("marginal depends on the counter at " + at(st, act));
        }
    }
    return out;
}

PathSample random_walk(const ProductMdp& p, Rng& rng, std::size_t T) {
    PathSample out;
    ProductState st = p.initial_state();
    double disc = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        const auto avail = p.available(st.s, st.q);
        const Slot slot = avail[std::uniform_int_distribution<std::size_t>(0, avail.size() - 1)(rng)];
        const ProductAction act = p.action_of(slot);
        const StepResult r = p.step(st, act, rng);
        if (r.next.n < st.n) out.violations.push_back("counter decreased");
        const bool acc = p.aut().is_accepting(r.next.q);
        if (r.next.n != (acc && !act.is_epsilon() ? std::min(st.n + 1, p.K()) : st.n))
            out.violations.push_back("counter rule broken");
        if (act.is_epsilon() && (r.next.s != st.s || r.next.n != st.n)) out.violations.push_back("epsilon changed s or n");
        if (r.reward < 0.0 || r.reward > p.schedule().U()) out.violations.push_back("reward out of range");
        if (r.discount != (r.reward > 0 ? 1.0 - r.reward : p.gamma())) out.violations.push_back("discount rule broken");
        out.discounted_return += disc * r.reward;
        disc *= r.discount;
        st = r.next;
    }
    return out;
}

ProductMdp random_product(Rng& rng) {
    const LabeledMdp env = random_env(rng, 4, 2);
    const Ldba aut = random_ldba(rng, 3);
    const auto K = static_cast<std::uint32_t>(std::uniform_int_distribution<int>(0, 3)(rng));
    const double U = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    const double gamma = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    return make_product(env, aut, K, RewardSchedule::linear(K, U), gamma);
}

}  // namespace kcq::testing
