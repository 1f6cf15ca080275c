#pragma once

// Tabular Q-learning on the K-counter product with a Q-table keyed on (s, q).

#include "kcq/product.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcq {

/// Action values over (s, q) x slot. The counter is not part of the key.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t num_env_states, std::size_t num_aut_states, std::size_t num_slots, double init_value);

    /// Table shaped for `p`, filled with `init_value`.
    static QTable for_product(const ProductMdp& p, double init_value);

    std::size_t num_env_states() const { return nS_; }
    std::size_t num_aut_states() const { return nQ_; }
    std::size_t num_slots() const { return nA_; }
    double init_value() const { return init_; }

    double get(EnvState s, AutState q, Slot a) const { return values_[index(s, q, a)]; }
    void set(EnvState s, AutState q, Slot a, double v) { values_[index(s, q, a)] = v; }
    double& ref(EnvState s, AutState q, Slot a) { return values_[index(s, q, a)]; }

    /// Max over the given slots (which must be non-empty).
    double max_over(EnvState s, AutState q, std::span<const Slot> slots) const;
    /// First slot attaining the max over `slots`.
    Slot argmax(EnvState s, AutState q, std::span<const Slot> slots) const;

    std::span<const double> values() const { return values_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t index(EnvState s, AutState q, Slot a) const { return (s * nQ_ + q) * nA_ + a; }

    std::size_t nS_ = 0;
    std::size_t nQ_ = 0;
    std::size_t nA_ = 0;
    double init_ = 0.0;
    std::vector<double> values_;
};

/// Text form: header `qtable S Q A init`, then `s q slot value` for entries
/// that differ from init (values printed round-trip exact).
std::string format_qtable(const QTable& t);
QTable parse_qtable(std::string_view text);

struct TrainConfig {
    double alpha = 0.1;
    double epsilon = 0.1;
    std::uint32_t K = 10;
    double U = 0.1;
    double gamma = 0.99;
    std::uint64_t max_episode = 40000;
    std::uint64_t max_timestep = 100;
    std::uint64_t eval_every = 10000;
    std::uint64_t seed = 0;
};

/// Throws Error describing the first out-of-range field.
void validate_config(const TrainConfig& cfg);

struct CurvePoint {
    std::uint64_t step;
    double sat_prob;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

using TrainingCurve = std::vector<CurvePoint>;

/// Satisfaction probability of a greedy policy.
using Evaluator = std::function<double(const Policy&)>;

struct TrainStats {
    std::uint64_t env_steps = 0;  // real product steps, epsilon moves included
    std::uint64_t q_updates = 0;
};

struct TrainResult {
    QTable table;
    TrainingCurve curve;
    TrainStats stats;
};

/// Uniform over `avail` with probability epsilon, otherwise the lowest-slot argmax.
Slot epsilon_greedy(const QTable& qt, EnvState s, AutState q, std::span<const Slot> avail, double epsilon, Rng& rng);

/// Q(key, a) += alpha * (reward + discount * max_{next_avail} Q(next_key, .) - Q(key, a)).
void q_update(QTable& qt, EnvState s, AutState q, Slot a, double reward, double discount, EnvState s2, AutState q2,
              std::span<const Slot> next_avail, double alpha);

/// KC Q-learning. `evaluator` may be empty, in which case no curve is recorded.
TrainResult train_kc(const ProductMdp& product, const TrainConfig& cfg, const Evaluator& evaluator);

/// KC Q-learning with counterfactual updates at every automaton state.
TrainResult train_cf_kc(const ProductMdp& product, const TrainConfig& cfg, const Evaluator& evaluator);

/// Lowest-slot argmax policy over every (s, q) pair.
Policy greedy_policy(const QTable& qt, const ProductMdp& product);

}  // namespace kcq
