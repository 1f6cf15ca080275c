#pragma once

// Hand-rolled generators for small random environments, automata and the
// exhaustive policy enumeration used as an independent optimum.

#include "kcq/automata.hpp"
#include "kcq/envs.hpp"
#include "kcq/product.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kcq::testing {

/// Random labeled MDP with 1..max_states states and 1..max_actions actions.
/// About a quarter of the states are absorbing; elsewhere each (s, a) is
/// available with a random successor distribution.
LabeledMdp random_env(Rng& rng, std::size_t max_states, std::size_t max_actions,
                      const std::vector<std::string>& ap = {"a", "b"});

/// Random valid LDBA with 2..max_states declared states (a sink may be added),
/// at least one of them accepting.
Ldba random_ldba(Rng& rng, std::size_t max_states, const std::vector<std::string>& ap = {"a", "b"});

/// Calls `visit` once per deterministic memoryless policy that differs on the
/// pairs reachable under it. Pairs never reached get their lowest slot.
/// Returns the number of policies visited.
std::size_t for_each_policy(const ProductMdp& p, const std::function<void(const Policy&)>& visit);

}  // namespace kcq::testing
