#pragma once

// Exact evaluation of a fixed memoryless policy: induced Markov chain over
// (s, q), bottom SCCs, Buchi satisfaction probability and PRISM DTMC export.

#include "kcq/product.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kcq {

using NodeId = std::uint32_t;

struct ChainNode {
    EnvState s;
    AutState q;

    friend bool operator==(const ChainNode&, const ChainNode&) = default;
    friend auto operator<=>(const ChainNode&, const ChainNode&) = default;
};

struct ChainEdge {
    NodeId to;
    double prob;
};

/// Markov chain induced by a policy on the counter-free product, restricted to
/// nodes reachable from the start.
struct InducedChain {
    std::size_t num_env_states = 0;
    std::size_t num_aut_states = 0;
    std::vector<ChainNode> nodes;
    std::vector<std::vector<ChainEdge>> edges;  // merged per target, ascending target
    std::vector<std::uint8_t> epsilon_step;     // node's policy action is an epsilon move
    std::vector<std::uint8_t> accepting;        // q is accepting
    NodeId start = 0;

    std::size_t size() const { return nodes.size(); }
    std::optional<NodeId> find(ChainNode n) const;
};

/// BFS from (s0, q0) under `policy`. Throws Error naming the node when the
/// policy picks an unavailable action.
InducedChain induce_chain(const ProductMdp& product, const Policy& policy);
InducedChain induce_chain(const LabeledMdp& env, const Ldba& aut, const Policy& policy);

struct BsccReport {
    std::vector<std::vector<NodeId>> components;  // each sorted ascending
    std::vector<std::uint8_t> accepting;          // per component
    std::vector<std::int32_t> component_of;       // per node; -1 for transient nodes
};

BsccReport bsccs(const InducedChain& chain);

/// Probability of reaching an accepting bottom SCC, for every node.
std::vector<double> acceptance_probabilities(const InducedChain& chain);

/// Probability of reaching an accepting bottom SCC from the start.
double satisfaction_probability(const InducedChain& chain);

/// Same nodes (by (s, q)), same start, same epsilon tags and edges with
/// probabilities within `tol`.
bool structurally_equal(const InducedChain& a, const InducedChain& b, double tol);

// -- PRISM ------------------------------------------------------------------

/// Proposition name to the environment states carrying it.
using LabelMap = std::vector<std::pair<std::string, std::vector<EnvState>>>;

LabelMap label_map_of(const LabeledMdp& env);

/// DTMC source with one command per chain node: `[ep]` for epsilon moves and
/// `[ac]` for environment moves. Variable m is the environment state, a the
/// automaton state.
std::string export_prism(const InducedChain& chain, const LabelMap& labels);

struct PrismCommand {
    std::string tag;
    std::uint32_t m;
    std::uint32_t a;
    std::vector<std::pair<double, std::pair<std::uint32_t, std::uint32_t>>> updates;  // (p, (m', a'))
};

struct PrismModel {
    std::uint32_t m_max = 0;
    std::uint32_t a_max = 0;
    std::uint32_t m_init = 0;
    std::uint32_t a_init = 0;
    std::vector<PrismCommand> commands;
    std::vector<std::pair<std::string, std::vector<std::uint32_t>>> labels;
};

/// Parses the subset of the PRISM language produced by export_prism.
PrismModel parse_prism(std::string_view text);

/// Rebuilds a chain from a parsed model; `accepting` lists the accepting automaton states.
InducedChain chain_from_prism(const PrismModel& model, std::span<const AutState> accepting);

}  // namespace kcq
