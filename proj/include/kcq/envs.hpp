#pragma once

// Tabular labeled MDPs and the grid-world builders.

#include "kcq/automata.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcq {

using EnvState = std::uint32_t;
using ActionId = std::uint32_t;
using Rng = std::mt19937_64;

struct Outcome {
    EnvState next;
    double prob;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Finite MDP with proposition labels. Rewards and discounting are defined on
/// the product, not here.
struct LabeledMdp {
    std::size_t num_states = 0;
    EnvState initial = 0;
    std::vector<std::string> action_names;
    std::vector<std::vector<ActionId>> available;  // per state, ascending
    std::vector<std::vector<Outcome>> trans;       // [s * num_actions + a]; empty when unavailable
    std::vector<std::string> ap;
    std::vector<PropSet> labels;                   // bitmask over `ap`

    std::size_t num_actions() const { return action_names.size(); }
    bool is_available(EnvState s, ActionId a) const;
    std::span<const Outcome> outcomes(EnvState s, ActionId a) const { return trans[s * num_actions() + a]; }

    /// Smallest non-zero transition probability.
    double min_probability() const;

    friend bool operator==(const LabeledMdp&, const LabeledMdp&) = default;
};

/// Checks every LabeledMdp invariant; returns the violations found.
std::vector<std::string> audit_mdp(const LabeledMdp& m);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Draws a successor of (s, a). Throws Error when a is not available at s.
EnvState sample_transition(const LabeledMdp& m, EnvState s, ActionId a, Rng& rng);

// -- grid worlds -------------------------------------------------------------

enum class Move : ActionId { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr std::size_t kNumMoves = 4;

struct CellSpec {
    bool wall = false;
    bool ice = false;           // intended direction 1/3, each perpendicular 1/3
    bool sink = false;          // single self-looping action
    bool force_right = false;   // only "right" is available
    bool oneway_right = false;  // may only be entered moving right; only "right" is available
    std::optional<double> gate_p_right;  // single action: right with p, down with 1-p
    std::vector<std::string> labels;

    friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

struct GridSpec {
    int rows = 0;
    int cols = 0;
    int start_row = 0;
    int start_col = 0;
    std::vector<std::string> ap;  // declaration order; defaults to first-use order of labels
    std::vector<CellSpec> cells;  // row-major

    static GridSpec empty(int rows, int cols);
    CellSpec& at(int r, int c) { return cells[static_cast<std::size_t>(r * cols + c)]; }
    const CellSpec& at(int r, int c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }
    EnvState state_of(int r, int c) const { return static_cast<EnvState>(r * cols + c); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Problems with a grid spec (start on wall/sink, bad gate probability, unknown labels).
std::vector<std::string> validate_grid(const GridSpec& spec);

/// Builds the MDP of a grid: state id = row * cols + col, actions up/down/left/right.
LabeledMdp build_grid(const GridSpec& spec);

/// Four-by-ten grid with the forced-right "a" row, the probabilistic gate at
/// (2,0) and the accepting sink at (2,9).
GridSpec probabilistic_gate_spec(double p_right = 0.8);
LabeledMdp build_probabilistic_gate();

/// 8x8 slippery lake with holes ("h") and camps ("a", "b").
LabeledMdp build_frozen_lake(const GridSpec& spec);

/// Office grid with walls, an ice patch, one-way gates and o/l/t/w/a/b labels.
LabeledMdp build_office_world(const GridSpec& spec);

/// Parses a grid config (`grid:`, `start:`, `cell:`, `label:`, optional `ap:`).
GridSpec parse_grid_spec(std::string_view text);

/// Loads either a grid config or a generic MDP config
/// (`states:`, `initial:`, `actions:`, `ap:`, `edge: s a s' p`, `label: s {..}`).
LabeledMdp load_mdp(std::string_view config_text);

/// Renders a grid spec back to config text.
std::string format_grid_spec(const GridSpec& spec);

}  // namespace kcq
