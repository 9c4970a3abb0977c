#pragma once

#include "switchmc/graph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace switchmc {

/// Ordered, distinct state names a_1..a_n.
class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels);

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<int> index_of(std::string_view label) const;

    bool operator==(const StateSpace&) const = default;

private:
    std::vector<std::string> labels_;
};

/// One entry of a structure matrix: either an exact probability or a
/// positive-but-unspecified placeholder (written `x` in model files).
struct SpecCell {
    static SpecCell exact(double p) { return {false, p}; }
    static SpecCell positive() { return {true, 0.0}; }

    bool wildcard = false;
    double value = 0.0;

    bool feasible() const { return wildcard || value > 0.0; }
    bool operator==(const SpecCell&) const = default;
};

/// A mode given as a structure matrix. Row invariants: exact entries sum to
/// at most 1; rows without wildcards sum to 1; rows with wildcards leave
/// strictly positive residual mass for them.
class ModeSpec {
public:
    ModeSpec(int n, std::vector<SpecCell> cells, std::string name = "");

    int size() const { return n_; }
    const std::string& name() const { return name_; }
    const SpecCell& at(int i, int j) const {
        return cells_[static_cast<std::size_t>(i * n_ + j)];
    }

    // states whose diagonal entry is the exact probability 1
    const std::vector<int>& absorbing() const { return absorbing_; }

    bool operator==(const ModeSpec&) const = default;

private:
    int n_;
    std::string name_;
    std::vector<SpecCell> cells_; // row-major
    std::vector<int> absorbing_;
};

/// A concrete row-stochastic transition matrix. The absorbing set is carried
/// structurally: concretization never turns a wildcard into an absorbing
/// diagonal, even if the filled value lands on 1.0.
class Mode {
public:
    // absorbing states inferred from the numeric diagonal (exact 1.0 entries)
    Mode(int n, std::vector<double> row_major, std::string name = "");
    // absorbing states fixed by the caller (used by concretize)
    Mode(int n, std::vector<double> row_major, std::vector<int> absorbing, std::string name);

    int size() const { return n_; }
    const std::string& name() const { return name_; }
    double at(int i, int j) const { return p_[static_cast<std::size_t>(i * n_ + j)]; }
    const std::vector<int>& absorbing() const { return absorbing_; }
    bool is_absorbing_state(int i) const;

    bool operator==(const Mode&) const = default;

private:
    void validate() const;

    int n_;
    std::string name_;
    std::vector<double> p_; // row-major
    std::vector<int> absorbing_;
};

/// Parsed model: state space plus structure matrices, prior to concretization.
struct ModelSpec {
    StateSpace states;
    std::vector<ModeSpec> modes;

    int state_count() const { return states.size(); }
    int mode_count() const { return static_cast<int>(modes.size()); }

    bool operator==(const ModelSpec&) const = default;
};

/// Concretized switched chain: the object every analysis operates on.
struct SwitchedChain {
    StateSpace states;
    std::vector<Mode> modes;

    int state_count() const { return states.size(); }
    int mode_count() const { return static_cast<int>(modes.size()); }
    const Mode& mode(int i) const { return modes[static_cast<std::size_t>(i)]; }

    bool operator==(const SwitchedChain&) const = default;
};

SwitchedChain make_chain(StateSpace states, std::vector<Mode> modes);

struct AbsorbingSets {
    std::vector<std::vector<int>> per_mode;
    std::vector<int> union_set;        // ascending
    std::vector<int> intersection_set; // ascending
};

// How wildcard cells receive the residual row mass.
struct UniformFill {};
struct SeededRandomFill {
    std::uint64_t seed = 0;
};
using FillStrategy = std::variant<UniformFill, SeededRandomFill>;

std::string to_string(const FillStrategy& strategy);
FillStrategy parse_fill_strategy(std::string_view text); // "uniform" | "seeded:<n>"

/*
 * Model file format (UTF-8 text):
 *
 *   # comment to end of line
 *   states: a1 a2 a3 a4
 *   mode P1:
 *   0 x x 0
 *   0 1 0 0
 *   0 x 0 x
 *   0 0 0 1
 *   mode P2:
 *   ...
 *
 * Each matrix row has one token per state: a decimal in [0,1] or the letter
 * `x` for a positive-unspecified entry. The equivalent JSON form carries the
 * same fields: {"states": [...], "modes": [{"name":..., "rows": [[...]]}]}
 * with numbers or the string "x" as entries.
 */
ModelSpec parse_model(std::string_view text);
ModelSpec parse_model_json(std::string_view text);
ModelSpec load_model(const std::string& path, std::string_view format = "text");
std::string serialize_model(const ModelSpec& model);
std::string serialize_model_json(const ModelSpec& model);

/// Fill wildcard cells: exact cells keep their value bit-for-bit; the row's
/// residual mass is split over the wildcards (equally under UniformFill,
/// by seeded random proportions under SeededRandomFill).
Mode concretize(const ModeSpec& spec, const FillStrategy& strategy = UniformFill{});
SwitchedChain concretize(const ModelSpec& model, const FillStrategy& strategy = UniformFill{});

AbsorbingSets absorbing_sets(const ModelSpec& model);
AbsorbingSets absorbing_sets(const SwitchedChain& chain);

/// Precondition shared by stabilizability analysis and policy synthesis:
/// the goal must be nonempty and every member absorbing in some mode.
void validate_goal_states(const SwitchedChain& chain, std::span<const int> goal);

/// True iff every state has a feasible transition sequence to the mode's own
/// absorbing set.
bool is_absorbing_mode(const Mode& mode);
bool is_absorbing_mode(const ModeSpec& mode);

/// Feasible transitions other than self-loops.
DiGraph simplified_graph(const Mode& mode);
DiGraph simplified_graph(const ModeSpec& mode);

std::vector<DiGraph> mode_graphs(const SwitchedChain& chain);
DiGraph union_graph(const SwitchedChain& chain);
DiGraph intersection_graph(const SwitchedChain& chain);

} // namespace switchmc
