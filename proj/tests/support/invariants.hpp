#pragma once

// Exhaustive and sampled checks of the product construction, written
// against the transition rules directly rather than the library's helpers.

#include "kcq/product.hpp"

#include <string>
#include <vector>

namespace kcq::testing {

/// Every reachable (state, action): successor probabilities sum to 1, the
/// counter advances exactly on accepting successors (capped at K), rewards and
/// discounts follow the schedule, epsilon moves keep s and n, and the
/// (s, q)-marginal does not depend on n. Returns one message per violation.
std::vector<std::string> product_violations(const ProductMdp& p);

struct PathSample {
    double discounted_return = 0.0;
    std::vector<std::string> violations;  // counter or discount rule broken along the path
};

/// Uniformly random walk of T steps from the initial state.
PathSample random_walk(const ProductMdp& p, Rng& rng, std::size_t T);

/// Random product over propositions {a, b}: env with at most 4 states and 2
/// actions, automaton with at most 3 declared states, K in [0, 3].
ProductMdp random_product(Rng& rng);

}  // namespace kcq::testing
