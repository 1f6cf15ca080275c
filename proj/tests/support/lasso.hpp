#pragma once

// Brute-force Buchi acceptance of ultimately periodic words u v^omega.

#include "kcq/automata.hpp"

#include <vector>

namespace kcq::testing {

struct LassoWord {
    std::vector<PropSet> prefix;
    std::vector<PropSet> loop;  // non-empty
};

/// True when some run of `a` over the word (resolving epsilon edges in every
/// possible way) visits an accepting state infinitely often while reading
/// infinitely many letters.
bool accepts_lasso(const Ldba& a, const LassoWord& w);

}  // namespace kcq::testing
