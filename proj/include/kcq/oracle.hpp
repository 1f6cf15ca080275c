#pragma once

// Optimal Buchi satisfaction probability on the counter-free (s, q) product.
// Self-contained: builds its own explicit product and linear solver so it can
// serve as an independent reference for the checker.

#include "kcq/automata.hpp"
#include "kcq/envs.hpp"
#include "kcq/product.hpp"

#include <vector>

namespace kcq {

struct MecMember {
    EnvState s;
    AutState q;
    std::vector<ProductAction> actions;  // actions whose successors all stay in the MEC
};

struct EndComponent {
    std::vector<MecMember> members;
    bool accepting = false;  // some member has an accepting automaton state
};

struct EndComponentReport {
    std::vector<EndComponent> mecs;
};

EndComponentReport max_end_components(const LabeledMdp& env, const Ldba& aut);

struct OracleResult {
    double probability = 0.0;     // exact value of the witness policy from (s0, q0)
    double vi_probability = 0.0;  // value-iteration estimate from (s0, q0)
    std::vector<double> values;   // value-iteration result per (s, q), index s * |Q| + q
    Policy witness;
    EndComponentReport mecs;
    std::size_t iterations = 0;
};

OracleResult solve_optimal(const LabeledMdp& env, const Ldba& aut, double tol = 1e-12);

/// Maximal probability, over all policies, of satisfying the automaton's Buchi condition.
double optimal_satisfaction(const LabeledMdp& env, const Ldba& aut, double tol = 1e-12);

}  // namespace kcq
