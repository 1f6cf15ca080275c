#pragma once

// Limit-deterministic Buchi automata with epsilon-transitions.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcq {

using AutState = std::uint32_t;

/// A set of atomic propositions, as a bitmask over an ordered proposition list.
using PropSet = std::uint32_t;

inline constexpr std::size_t kMaxPropositions = 16;

/// A letter of the automaton alphabet: a proposition set, or epsilon.
class Letter {
public:
    static constexpr Letter epsilon() { return Letter(0, true); }
    static constexpr Letter of(PropSet props) { return Letter(props, false); }

    constexpr bool is_epsilon() const { return epsilon_; }
    constexpr PropSet props() const { return props_; }

    friend constexpr bool operator==(Letter, Letter) = default;

private:
    constexpr Letter(PropSet props, bool eps) : props_(props), epsilon_(eps) {}

    PropSet props_;
    bool epsilon_;
};

/// Automaton over the alphabet 2^ap plus epsilon.
///
/// `delta[q][letter]` holds the successors of q on the proposition set `letter`
/// (an index in [0, 2^|ap|)). Epsilon edges live in `epsilon_edges`. After
/// parsing every non-epsilon entry has exactly one successor; missing entries
/// were routed to `sink`.
struct Ldba {
    std::vector<std::string> ap;
    std::size_t num_states = 0;
    AutState initial = 0;
    std::vector<AutState> accepting;
    std::vector<AutState> nondet_part;
    std::vector<AutState> det_part;
    std::vector<std::vector<std::vector<AutState>>> delta;
    std::vector<std::vector<AutState>> epsilon_edges;
    std::optional<AutState> sink;

    std::size_t num_letters() const { return std::size_t{1} << ap.size(); }
    bool is_accepting(AutState q) const;
    bool is_nondet(AutState q) const;

    /// Index of proposition `name` in `ap`, if declared.
    std::optional<std::size_t> prop_index(std::string_view name) const;

    /// Creates `n` states with empty transition tables over `ap`.
    static Ldba with_states(std::vector<std::string> ap, std::size_t n);
};

/// Unique successor of q on a proposition letter. Requires a sink-completed automaton.
AutState step_automaton(const Ldba& a, AutState q, Letter letter);

/// Delta(q, epsilon); possibly empty.
std::span<const AutState> epsilon_successors(const Ldba& a, AutState q);

/// Checks the limit-determinism conditions and the Q_N/Q_D partition.
/// Returns one description per violated condition instance; empty iff valid.
std::vector<std::string> validate_ldba(const Ldba& a);

/// Routes every missing non-epsilon transition to a non-accepting sink in Q_D.
/// The sink is appended as a new state only when at least one entry is missing.
void complete_with_sink(Ldba& a);

/// Parses the line-oriented automaton format, completes it with a sink and
/// validates it. Throws ParseError on syntax errors and SemanticError on
/// unknown ids, undeclared propositions or limit-determinism violations.
Ldba parse_ldba(std::string_view text);

/// Serializes an automaton back to the text format (fully expanded letters).
std::string format_ldba(const Ldba& a);

/// "{a,c}" rendering of a proposition set; "eps" for epsilon.
std::string format_letter(const Ldba& a, Letter letter);

/// Evaluates a guard expression such as `a&!c`, `(a|b)&!h`, `true` over every
/// letter of `ap`, returning the matching letters in increasing order.
/// Column numbers in thrown ParseErrors are relative to `expr` (1-based) and
/// shifted by `column_offset`.
std::vector<PropSet> expand_guard(std::string_view expr, const std::vector<std::string>& ap,
                                  std::size_t line = 1, std::size_t column_offset = 0);

}  // namespace kcq
