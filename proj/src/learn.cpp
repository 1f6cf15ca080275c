#include "kcq/learn.hpp"
#include "kcq/errors.hpp"
#include "text_util.hpp"

#include <charconv>
#include <sstream>

namespace kcq {

QTable::QTable(std::size_t num_env_states, std::size_t num_aut_states, std::size_t num_slots, double init_value)
    : nS_(num_env_states), nQ_(num_aut_states), nA_(num_slots), init_(init_value),
      values_(num_env_states * num_aut_states * num_slots, init_value) {}

QTable QTable::for_product(const ProductMdp& p, double init_value) {
    return QTable(p.num_env_states(), p.num_aut_states(), p.num_slots(), init_value);
}

double QTable::max_over(EnvState s, AutState q, std::span<const Slot> slots) const {
    const double* row = values_.data() + index(s, q, 0);
    double best = row[slots[0]];
    for (std::size_t i = 1; i < slots.size(); ++i) best = std::max(best, row[slots[i]]);
    return best;
}

Slot QTable::argmax(EnvState s, AutState q, std::span<const Slot> slots) const {
    const double* row = values_.data() + index(s, q, 0);
    Slot best = slots[0];
    for (std::size_t i = 1; i < slots.size(); ++i)
        if (row[slots[i]] > row[best]) best = slots[i];
    return best;
}

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string format_qtable(const QTable& t) {
    std::string out = "qtable " + std::to_string(t.num_env_states()) + " " + std::to_string(t.num_aut_states()) + " " +
                      std::to_string(t.num_slots()) + " " + shortest(t.init_value()) + "\n";
    for (EnvState s = 0; s < t.num_env_states(); ++s)
        for (AutState q = 0; q < t.num_aut_states(); ++q)
            for (Slot a = 0; a < t.num_slots(); ++a)
                if (const double v = t.get(s, q, a); v != t.init_value())
                    out += std::to_string(s) + " " + std::to_string(q) + " " + std::to_string(a) + " " + shortest(v) + "\n";
    return out;
}

QTable parse_qtable(std::string_view text) {
    std::size_t line_no = 0;
    QTable t;
    bool have_header = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        const auto toks = text::tokenize(line, 1);
        if (toks.empty()) continue;
        if (!have_header) {
            if (toks.size() != 5 || toks[0].text != "qtable")
                throw ParseError("expected 'qtable S Q A init' header", line_no, 1);
            const auto dim = [&](const text::Token& tok) {
                const long long v = text::parse_int(tok, line_no);
                if (v <= 0) throw ParseError("table dimension must be positive", line_no, tok.column);
                return static_cast<std::size_t>(v);
            };
            t = QTable(dim(toks[1]), dim(toks[2]), dim(toks[3]), text::parse_double(toks[4], line_no));
            have_header = true;
            continue;
        }
        if (toks.size() != 4) throw ParseError("expected 's q slot value'", line_no, 1);
        const auto idx = [&](const text::Token& tok, std::size_t bound) {
            const long long v = text::parse_int(tok, line_no);
            if (v < 0 || static_cast<std::size_t>(v) >= bound) throw ParseError("index out of range", line_no, tok.column);
            return static_cast<std::uint32_t>(v);
        };
        const EnvState s = idx(toks[0], t.num_env_states());
        const AutState q = idx(toks[1], t.num_aut_states());
        const Slot a = idx(toks[2], t.num_slots());
        t.set(s, q, a, text::parse_double(toks[3], line_no));
    }
    if (!have_header) throw ParseError("empty Q-table file", 1, 1);
    return t;
}

void validate_config(const TrainConfig& cfg) {
    if (!(cfg.alpha > 0.0) || cfg.alpha > 1.0) throw Error("alpha must lie in (0,1]");
    if (!(cfg.epsilon >= 0.0) || cfg.epsilon > 1.0) throw Error("epsilon must lie in [0,1]");
    if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0) throw Error("gamma must lie in (0,1]");
    if (!(cfg.U > 0.0) || cfg.U > 1.0) throw Error("U must lie in (0,1]");
    if (cfg.max_timestep == 0) throw Error("max_timestep must be positive");
    if (cfg.eval_every == 0) throw Error("eval_every must be positive");
}

Slot epsilon_greedy(const QTable& qt, EnvState s, AutState q, std::span<const Slot> avail, double epsilon, Rng& rng) {
    if (avail.empty()) throw Error("no available action");
    if (epsilon > 0.0 && uniform01(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, avail.size() - 1);
        return avail[pick(rng)];
    }
    return qt.argmax(s, q, avail);
}

void q_update(QTable& qt, EnvState s, AutState q, Slot a, double reward, double discount, EnvState s2, AutState q2,
              std::span<const Slot> next_avail, double alpha) {
    double& v = qt.ref(s, q, a);
    v += alpha * (reward + discount * qt.max_over(s2, q2, next_avail) - v);
}

namespace {

template <bool Counterfactual>
TrainResult train(const ProductMdp& product, const TrainConfig& cfg, const Evaluator& evaluator) {
    validate_config(cfg);
    if (cfg.K != product.K()) throw Error("config K differs from the product's K");
    TrainResult result{QTable::for_product(product, 2.0 * cfg.U), {}, {}};
    QTable& qt = result.table;
    Rng rng(cfg.seed);
    const std::size_t nQ = product.num_aut_states();

    for (std::uint64_t ep = 0; ep < cfg.max_episode; ++ep) {
        ProductState st = product.initial_state();
        for (std::uint64_t t = 0; t < cfg.max_timestep; ++t) {
            const Slot slot = epsilon_greedy(qt, st.s, st.q, product.available(st.s, st.q), cfg.epsilon, rng);
            const ProductAction act = product.action_of(slot);
            const EnvState s2 = act.is_epsilon() ? st.s : product.sample_env(st.s, act.id, rng);
            StepResult real{};
            if constexpr (Counterfactual) {
                for (AutState qb = 0; qb < nQ; ++qb) {
                    if (act.is_epsilon() && !product.is_available(st.s, qb, act)) continue;
                    const StepResult r = product.apply({st.s, qb, st.n}, act, s2);
                    q_update(qt, st.s, qb, slot, r.reward, r.discount, r.next.s, r.next.q,
                             product.available(r.next.s, r.next.q), cfg.alpha);
                    ++result.stats.q_updates;
                    if (qb == st.q) real = r;
                }
            } else {
                real = product.apply(st, act, s2);
                q_update(qt, st.s, st.q, slot, real.reward, real.discount, real.next.s, real.next.q,
                         product.available(real.next.s, real.next.q), cfg.alpha);
                ++result.stats.q_updates;
            }
            st = real.next;
            ++result.stats.env_steps;
            if (evaluator && result.stats.env_steps % cfg.eval_every == 0)
                result.curve.push_back({result.stats.env_steps, evaluator(greedy_policy(qt, product))});
        }
    }
    return result;
}

}  // namespace

TrainResult train_kc(const ProductMdp& product, const TrainConfig& cfg, const Evaluator& evaluator) {
    return train<false>(product, cfg, evaluator);
}

TrainResult train_cf_kc(const ProductMdp& product, const TrainConfig& cfg, const Evaluator& evaluator) {
    return train<true>(product, cfg, evaluator);
}

Policy greedy_policy(const QTable& qt, const ProductMdp& product) {
    Policy pi;
    pi.num_aut_states = product.num_aut_states();
    pi.choice.resize(product.num_env_states() * pi.num_aut_states);
    for (EnvState s = 0; s < product.num_env_states(); ++s)
        for (AutState q = 0; q < pi.num_aut_states; ++q)
            pi.at(s, q) = product.action_of(qt.argmax(s, q, product.available(s, q)));
    return pi;
}

}  // namespace kcq
