#pragma once

// K-counter product of a labeled MDP and an LDBA, with the counter-indexed
// reward schedule and the reward-dependent discount.

#include "kcq/automata.hpp"
#include "kcq/envs.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace kcq {

/// (environment state, automaton state, accepting-visit counter).
struct ProductState {
    EnvState s = 0;
    AutState q = 0;
    std::uint32_t n = 0;

    friend bool operator==(const ProductState&, const ProductState&) = default;
    friend auto operator<=>(const ProductState&, const ProductState&) = default;
};

/// An environment action, or an epsilon-move of the automaton to `id`.
struct ProductAction {
    enum class Kind : std::uint8_t { Env, Epsilon };

    Kind kind = Kind::Env;
    std::uint32_t id = 0;

    static constexpr ProductAction env(ActionId a) { return {Kind::Env, a}; }
    static constexpr ProductAction epsilon(AutState target) { return {Kind::Epsilon, target}; }
    constexpr bool is_epsilon() const { return kind == Kind::Epsilon; }

    friend bool operator==(const ProductAction&, const ProductAction&) = default;
};

/// Dense index of a product action: environment actions first, then one slot
/// per epsilon target. Lower slots win argmax ties.
using Slot = std::uint32_t;

/// Rewards R_1..R_K for accepting visits, indexed by the post-visit counter.
/// With K = 0 there is a single reward R_0.
class RewardSchedule {
public:
    /// R_n = U * n / K (constant U when K = 0).
    static RewardSchedule linear(std::uint32_t K, double U);
    /// R_n = U for every n.
    static RewardSchedule constant(std::uint32_t K, double U);
    /// Explicit values; `values[n]` for n in [1..K] (or [0] when K = 0). Each must lie in (0, U].
    static RewardSchedule custom(std::uint32_t K, double U, std::vector<double> values);

    std::uint32_t K() const { return K_; }
    double U() const { return U_; }
    double reward(std::uint32_t n) const { return values_[n]; }

private:
    RewardSchedule(std::uint32_t K, double U, std::vector<double> values);

    std::uint32_t K_;
    double U_;
    std::vector<double> values_;
};

/// Deterministic memoryless policy over (s, q) pairs.
struct Policy {
    std::size_t num_aut_states = 0;
    std::vector<ProductAction> choice;  // [s * num_aut_states + q]

    const ProductAction& at(EnvState s, AutState q) const { return choice[s * num_aut_states + q]; }
    ProductAction& at(EnvState s, AutState q) { return choice[s * num_aut_states + q]; }
};

struct StepResult {
    ProductState next;
    double reward = 0.0;
    double discount = 1.0;
};

/// Product MDP evaluated on the fly. Immutable after construction.
class ProductMdp {
public:
    ProductMdp(LabeledMdp env, Ldba aut, RewardSchedule schedule, double gamma);

    const LabeledMdp& env() const { return env_; }
    const Ldba& aut() const { return aut_; }
    const RewardSchedule& schedule() const { return schedule_; }
    std::uint32_t K() const { return schedule_.K(); }
    double gamma() const { return gamma_; }

    ProductState initial_state() const { return {env_.initial, aut_.initial, 0}; }
    bool is_accepting(AutState q) const { return accepting_[q] != 0; }

    std::size_t num_env_states() const { return env_.num_states; }
    std::size_t num_aut_states() const { return aut_.num_states; }
    std::size_t num_slots() const { return num_env_actions_ + aut_.num_states; }

    Slot slot_of(ProductAction a) const {
        return a.is_epsilon() ? static_cast<Slot>(num_env_actions_ + a.id) : static_cast<Slot>(a.id);
    }
    ProductAction action_of(Slot slot) const {
        return slot < num_env_actions_ ? ProductAction::env(slot)
                                       : ProductAction::epsilon(static_cast<AutState>(slot - num_env_actions_));
    }

    /// Available actions at (s, q, .) as ascending slots: available(s) then epsilon targets of q.
    std::span<const Slot> available(EnvState s, AutState q) const {
        const std::size_t key = s * aut_.num_states + q;
        return {avail_.data() + avail_offset_[key], avail_.data() + avail_offset_[key + 1]};
    }
    bool is_available(EnvState s, AutState q, ProductAction a) const;

    /// Letter read by the automaton at environment state s (L(s) restricted to the automaton's ap).
    PropSet letter(EnvState s) const { return letters_[s]; }
    /// Automaton successor of q when leaving s with an environment action.
    AutState next_aut(AutState q, EnvState s) const { return next_q_[q * aut_.num_letters() + letters_[s]]; }

    /// Samples the environment successor of (s, a) for environment actions.
    EnvState sample_env(EnvState s, ActionId a, Rng& rng) const;

    /// Deterministic part of a transition: given the sampled environment
    /// successor (ignored for epsilon actions), computes the next product
    /// state, reward and step discount.
    StepResult apply(const ProductState& st, ProductAction act, EnvState env_next) const;

    /// One sampled product transition. Throws Error when `act` is not available.
    StepResult step(const ProductState& st, ProductAction act, Rng& rng) const;

    /// Exact successor distribution of (st, act).
    std::vector<std::pair<StepResult, double>> successors(const ProductState& st, ProductAction act) const;

    /// Breadth-first enumeration of product states reachable from the initial state.
    std::vector<ProductState> enumerate_reachable(std::size_t limit = 10'000'000) const;

private:
    LabeledMdp env_;
    Ldba aut_;
    RewardSchedule schedule_;
    double gamma_;
    std::size_t num_env_actions_;
    std::vector<PropSet> letters_;
    std::vector<AutState> next_q_;
    std::vector<std::uint8_t> accepting_;
    std::vector<Slot> avail_;
    std::vector<std::size_t> avail_offset_;
    // Cumulative outcome probabilities per (s, a) for sampling.
    std::vector<std::size_t> cdf_offset_;
    std::vector<double> cdf_;
    std::vector<EnvState> cdf_next_;
};

/// Validates inputs and builds the product. Throws Error on proposition
/// mismatch (automaton propositions missing from the environment) or invalid
/// K / gamma.
ProductMdp make_product(const LabeledMdp& env, const Ldba& aut, std::uint32_t K, const RewardSchedule& schedule,
                        double gamma);

struct AdvisedParameters {
    double U;
    double gamma;
};

/// Reward bound and discount from |S|, the minimum transition probability and
/// an optional bound on the steps between accepting visits:
/// C = |S| / p_min, N = n_bound or |S|, U = 1/C, gamma = 1 - 1/(C*N + C),
/// both clamped into (0, 1).
AdvisedParameters advise_parameters(std::size_t num_states, double p_min, std::optional<double> n_bound = std::nullopt);

}  // namespace kcq
