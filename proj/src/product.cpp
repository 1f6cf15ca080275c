#include "kcq/product.hpp"
#include "kcq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace kcq {

RewardSchedule::RewardSchedule(std::uint32_t K, double U, std::vector<double> values)
    : K_(K), U_(U), values_(std::move(values)) {
    if (!(U > 0.0) || U > 1.0) throw Error("reward bound U must lie in (0,1]");
    if (values_.size() != static_cast<std::size_t>(K) + 1) throw Error("reward schedule needs K+1 entries");
    const std::size_t first = K == 0 ? 0 : 1;
    for (std::size_t n = first; n < values_.size(); ++n)
        if (!(values_[n] > 0.0) || values_[n] > U)
            throw Error("reward R_" + std::to_string(n) + " outside (0, U]");
}

RewardSchedule RewardSchedule::linear(std::uint32_t K, double U) {
    std::vector<double> v(static_cast<std::size_t>(K) + 1, U);
    // n = K is pinned to U so rounding cannot push the top reward past the bound.
    for (std::uint32_t n = 0; n <= K && K > 0; ++n) v[n] = n == K ? U : U * n / K;
    return RewardSchedule(K, U, std::move(v));
}

RewardSchedule RewardSchedule::constant(std::uint32_t K, double U) {
    return RewardSchedule(K, U, std::vector<double>(static_cast<std::size_t>(K) + 1, U));
}

RewardSchedule RewardSchedule::custom(std::uint32_t K, double U, std::vector<double> values) {
    if (K > 0 && values.size() == K) values.insert(values.begin(), 0.0);
    return RewardSchedule(K, U, std::move(values));
}

ProductMdp::ProductMdp(LabeledMdp env, Ldba aut, RewardSchedule schedule, double gamma)
    : env_(std::move(env)), aut_(std::move(aut)), schedule_(std::move(schedule)), gamma_(gamma),
      num_env_actions_(env_.num_actions()) {
    // Map automaton propositions onto environment label bits.
    std::vector<std::size_t> env_bit(aut_.ap.size());
    for (std::size_t i = 0; i < aut_.ap.size(); ++i) {
        const auto it = std::find(env_.ap.begin(), env_.ap.end(), aut_.ap[i]);
        if (it == env_.ap.end())
            throw Error("proposition mismatch: automaton proposition '" + aut_.ap[i] + "' is not an environment label");
        env_bit[i] = static_cast<std::size_t>(it - env_.ap.begin());
    }
    const std::size_t nS = env_.num_states;
    const std::size_t nQ = aut_.num_states;

    letters_.assign(nS, 0);
    for (EnvState s = 0; s < nS; ++s)
        for (std::size_t i = 0; i < env_bit.size(); ++i)
            if (env_.labels[s] >> env_bit[i] & 1U) letters_[s] |= PropSet{1} << i;

    next_q_.assign(nQ * aut_.num_letters(), 0);
    for (AutState q = 0; q < nQ; ++q)
        for (PropSet l = 0; l < aut_.num_letters(); ++l)
            next_q_[q * aut_.num_letters() + l] = step_automaton(aut_, q, Letter::of(l));

    accepting_.assign(nQ, 0);
    for (AutState q : aut_.accepting) accepting_[q] = 1;

    avail_offset_.reserve(nS * nQ + 1);
    avail_offset_.push_back(0);
    for (EnvState s = 0; s < nS; ++s) {
        for (AutState q = 0; q < nQ; ++q) {
            for (ActionId a : env_.available[s]) avail_.push_back(a);
            std::vector<AutState> eps(epsilon_successors(aut_, q).begin(), epsilon_successors(aut_, q).end());
            std::sort(eps.begin(), eps.end());
            eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
            for (AutState t : eps) avail_.push_back(static_cast<Slot>(num_env_actions_ + t));
            avail_offset_.push_back(avail_.size());
        }
    }

    cdf_offset_.reserve(nS * num_env_actions_ + 1);
    cdf_offset_.push_back(0);
    for (EnvState s = 0; s < nS; ++s) {
        for (ActionId a = 0; a < num_env_actions_; ++a) {
            double acc = 0.0;
            for (const auto& o : env_.outcomes(s, a)) {
                acc += o.prob;
                cdf_.push_back(acc);
                cdf_next_.push_back(o.next);
            }
            cdf_offset_.push_back(cdf_.size());
        }
    }
}

bool ProductMdp::is_available(EnvState s, AutState q, ProductAction a) const {
    if (s >= env_.num_states || q >= aut_.num_states) return false;
    if (a.is_epsilon() && a.id >= aut_.num_states) return false;
    if (!a.is_epsilon() && a.id >= num_env_actions_) return false;
    const auto av = available(s, q);
    return std::binary_search(av.begin(), av.end(), slot_of(a));
}

EnvState ProductMdp::sample_env(EnvState s, ActionId a, Rng& rng) const {
    const std::size_t key = s * num_env_actions_ + a;
    const std::size_t lo = cdf_offset_[key];
    const std::size_t hi = cdf_offset_[key + 1];
    if (hi - lo == 1) return cdf_next_[lo];
    const double u = uniform01(rng);
    for (std::size_t i = lo; i + 1 < hi; ++i)
        if (u < cdf_[i]) return cdf_next_[i];
    return cdf_next_[hi - 1];
}

StepResult ProductMdp::apply(const ProductState& st, ProductAction act, EnvState env_next) const {
    StepResult r;
    if (act.is_epsilon()) {
        r.next = {st.s, act.id, st.n};
    } else {
        const AutState q2 = next_aut(st.q, st.s);
        const std::uint32_t n2 = accepting_[q2] ? std::min(st.n + 1, K()) : st.n;
        r.next = {env_next, q2, n2};
    }
    if (accepting_[r.next.q]) r.reward = schedule_.reward(std::min(st.n + 1, K()));
    r.discount = r.reward > 0.0 ? 1.0 - r.reward : gamma_;
    return r;
}

StepResult ProductMdp::step(const ProductState& st, ProductAction act, Rng& rng) const {
    if (!is_available(st.s, st.q, act)) throw Error("product action not available at the current state");
    const EnvState s2 = act.is_epsilon() ? st.s : sample_env(st.s, act.id, rng);
    return apply(st, act, s2);
}

std::vector<std::pair<StepResult, double>> ProductMdp::successors(const ProductState& st, ProductAction act) const {
    if (!is_available(st.s, st.q, act)) throw Error("product action not available at the current state");
    std::vector<std::pair<StepResult, double>> out;
    if (act.is_epsilon()) {
        out.emplace_back(apply(st, act, st.s), 1.0);
    } else {
        for (const auto& o : env_.outcomes(st.s, act.id)) out.emplace_back(apply(st, act, o.next), o.prob);
    }
    return out;
}

std::vector<ProductState> ProductMdp::enumerate_reachable(std::size_t limit) const {
    const std::size_t nQ = aut_.num_states;
    const std::size_t nN = static_cast<std::size_t>(K()) + 1;
    const auto index = [&](const ProductState& p) { return (p.s * nQ + p.q) * nN + p.n; };
    std::vector<std::uint8_t> seen(env_.num_states * nQ * nN, 0);
    std::vector<ProductState> order;
    std::deque<ProductState> queue;
    const ProductState init = initial_state();
    seen[index(init)] = 1;
    queue.push_back(init);
    while (!queue.empty()) {
        const ProductState cur = queue.front();
        queue.pop_front();
        order.push_back(cur);
        if (order.size() > limit) throw Error("product enumeration exceeded the state limit");
        for (Slot slot : available(cur.s, cur.q)) {
            for (const auto& [res, p] : successors(cur, action_of(slot))) {
                (void)p;
                auto& flag = seen[index(res.next)];
                if (!flag) {
                    flag = 1;
                    queue.push_back(res.next);
                }
            }
        }
    }
    return order;
}

ProductMdp make_product(const LabeledMdp& env, const Ldba& aut, std::uint32_t K, const RewardSchedule& schedule,
                        double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0) throw Error("gamma must lie in (0,1]");
    if (schedule.K() != K) throw Error("reward schedule built for a different K");
    if (auto v = validate_ldba(aut); !v.empty()) throw SemanticError(std::move(v));
    if (auto v = audit_mdp(env); !v.empty()) throw SemanticError(std::move(v));
    return ProductMdp(env, aut, schedule, gamma);
}

AdvisedParameters advise_parameters(std::size_t num_states, double p_min, std::optional<double> n_bound) {
    if (num_states == 0) throw Error("advisor needs at least one state");
    if (!(p_min > 0.0) || p_min > 1.0) throw Error("p_min must lie in (0,1]");
    const double C = static_cast<double>(num_states) / p_min;
    const double N = n_bound.value_or(static_cast<double>(num_states));
    const double below_one = std::nextafter(1.0, 0.0);
    const double tiny = std::numeric_limits<double>::min();
    const double U = std::clamp(1.0 / C, tiny, below_one);
    const double gamma = std::clamp(1.0 - 1.0 / (C * N + C), tiny, below_one);
    return {U, gamma};
}

}  // namespace kcq
