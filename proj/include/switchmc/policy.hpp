#pragma once

#include "switchmc/errors.hpp"
#include "switchmc/graph.hpp"
#include "switchmc/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace switchmc {

/// State-feedback switching policy: one mode index (0-based) per state.
struct SwitchingPolicy {
    std::vector<int> mode_for_state;

    int size() const { return static_cast<int>(mode_for_state.size()); }
    int mode_at(int state) const { return mode_for_state[static_cast<std::size_t>(state)]; }

    bool operator==(const SwitchingPolicy&) const = default;
};

void validate_policy_shape(const SwitchingPolicy& policy, const SwitchedChain& chain);

struct TieBreakLowest {};
struct TieBreakSeeded {
    std::uint64_t seed = 0;
};
using TieBreak = std::variant<TieBreakLowest, TieBreakSeeded>;

std::string to_string(const TieBreak& tie_break);
TieBreak parse_tie_break(std::string_view text); // "lowest" | "seeded:<n>"

/// Thrown when the goal set fails the reachability test that synthesis needs.
class UnstabilizableError : public Error {
public:
    UnstabilizableError(std::string message, std::vector<int> unreachable)
        : Error(std::move(message)), unreachable_states(std::move(unreachable)) {}

    std::vector<int> unreachable_states; // states with infinite union-graph distance
};

/// States strictly closer to the goal than `state` on the union graph.
std::vector<int> closer_set(const SwitchedChain& chain, std::span<const int> goal, int state);

/// Per-state record of why the synthesized mode choice makes progress:
/// outside the goal, `target` is a strictly-closer state the chosen mode
/// reaches with positive probability; on the goal, the chosen mode keeps the
/// state absorbing and `target` is -1.
struct PolicyStep {
    int state = -1;
    int mode = -1;
    int target = -1;
    Distance target_distance;
};

struct SynthesisResult {
    SwitchingPolicy policy;
    std::vector<PolicyStep> certificate;
    std::vector<Distance> distances; // union-graph distance to the goal, per state
};

/// Constructive synthesis: each non-goal state is mapped to a mode with a
/// positive-probability transition to a strictly closer state; each goal
/// state to a mode in which it is absorbing. Deterministic lowest-index
/// tie-breaking by default; a seeded random pick is available for exploring
/// the feasible choices.
SynthesisResult synthesize_policy(const SwitchedChain& chain, std::span<const int> goal,
                                  const TieBreak& tie_break = TieBreakLowest{});

/// The time-invariant chain obtained by fixing a policy: row i is copied
/// from the mode the policy assigns to state i.
struct InducedChain {
    Mode mode;
    SwitchingPolicy policy;
};

InducedChain induced_chain(const SwitchedChain& chain, const SwitchingPolicy& policy);

/// Graph-level check that the policy actually drives every state into the
/// goal: every state reaches the goal on the induced chain's simplified
/// graph and every goal state is absorbing under its assigned mode.
bool validate_policy(const SwitchedChain& chain, const SwitchingPolicy& policy,
                     std::span<const int> goal);

/// Expected steps to reach the goal from each state, via the transient-part
/// linear system t = 1 + Q_T t (0 on goal states). Dense LU with partial
/// pivoting, value-iteration fallback for ill-conditioned systems. Throws
/// when some state cannot reach the goal.
std::vector<double> expected_absorption_time(const InducedChain& induced,
                                             std::span<const int> goal);

struct AbsorptionProbabilities {
    std::vector<int> absorbing;  // column order, ascending state index
    std::vector<double> prob;    // n x absorbing.size(), row-major

    double at(int state, int column) const {
        return prob[static_cast<std::size_t>(state) * absorbing.size() +
                    static_cast<std::size_t>(column)];
    }
    double at_state(int state, int absorbing_state) const;
};

/// Probability of ultimate absorption at each member of `absorbing`, per
/// start state. Requires the induced chain to be absorbing to that set.
AbsorptionProbabilities absorption_probabilities(const InducedChain& induced,
                                                 std::span<const int> absorbing);

// policy file format: one "<state-label> <mode-index>" line per state,
// mode indices 1-based
std::string serialize_policy(const SwitchingPolicy& policy, const StateSpace& states);
SwitchingPolicy parse_policy(std::string_view text, const StateSpace& states, int mode_count);
SwitchingPolicy load_policy(const std::string& path, const StateSpace& states, int mode_count);

} // namespace switchmc
