#pragma once

#include "switchmc/graph.hpp"
#include "switchmc/model.hpp"
#include "switchmc/policy.hpp"
#include "switchmc/simulate.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace switchmc {

/// Structured witness attached to every verdict so reports can be audited
/// without rerunning the analysis.
struct Certificate {
    enum class Kind {
        None,
        Sink,                 // states[0]: sink outside the absorbing set
        NotWeaklyAcyclic,     // states: nodes with no path to any sink (mode set when per-mode)
        Cycle,                // states: directed cycle, closing edge implicit
        TopologicalOrder,     // states: order witnessing acyclicity
        PathCover,            // paths: shortest intersection-graph path per non-absorbing state
        DistanceViolation,    // mode, states[0]: no out-neighbor improves the max distance
        MaxDistanceTable,     // distances: per-state max distance over the mode graphs
        AbsorbingSetMismatch, // mode vs mode2 differ; states[0]: witness state
        TrapPolicy,           // policy; states: states the trap strands
        DistanceTable,        // distances: per-state union-graph distance to the goal
    };

    Kind kind = Kind::None;
    int mode = -1;  // 0-based when >= 0
    int mode2 = -1;
    std::vector<int> states;
    std::vector<Distance> distances;
    std::vector<Path> paths;
    std::optional<SwitchingPolicy> policy;
};

struct ConditionVerdict {
    bool holds = false;
    Certificate certificate;
};

enum class ArbitraryVerdict { Guaranteed, Refuted, Unknown };
std::string to_string(ArbitraryVerdict verdict);

struct StabilizabilitySection {
    std::vector<int> goal;
    bool stabilizable = false;
    std::vector<Distance> distances;         // union-graph distance per state
    std::optional<std::int64_t> max_distance; // set when every distance is finite
};

struct AnalysisReport {
    AbsorbingSets absorbing;
    bool equal_absorbing_sets = false;
    std::optional<Certificate> absorbing_set_mismatch;

    // evaluated only when the per-mode absorbing sets coincide
    std::optional<ConditionVerdict> cond1, cond2, cond3;

    ArbitraryVerdict arbitrary = ArbitraryVerdict::Unknown;
    std::string arbitrary_via; // "condition1".."condition3", "unequal-absorbing-sets", "trap-policy"
    std::optional<Certificate> trap;
    std::map<int, double> path_probability_bounds; // per transient state, when cond1 holds
    std::string note;

    std::optional<StabilizabilitySection> stabilizability;
};

/// Stabilizability test: true iff every state has finite
/// union-graph distance to the goal. The distance table is the certificate.
/// The goal must be nonempty and contained in the union absorbing set.
std::pair<bool, std::vector<Distance>> check_stabilizable(const SwitchedChain& chain,
                                                          std::span<const int> goal);

/// Necessary condition for absorption under arbitrary switching: all modes
/// share one absorbing set.
bool check_equal_absorbing_sets(const SwitchedChain& chain);
std::optional<Certificate> find_absorbing_set_mismatch(const SwitchedChain& chain);

// The three sufficient conditions. Each requires equal absorbing sets.
ConditionVerdict check_condition1(const SwitchedChain& chain); // intersection graph weakly acyclic, sinks only in A*
ConditionVerdict check_condition2(const SwitchedChain& chain); // union graph acyclic
ConditionVerdict check_condition3(const SwitchedChain& chain); // every mode strictly shrinks the max distance

/// Probability that the shortest intersection-graph path from `state` into
/// the absorbing set is taken within |path| steps, minimized over modes and
/// edges: a lower bound valid under any switching signal.
double absorption_probability_lower_bound(const SwitchedChain& chain, int state);

struct AnalyzeOptions {
    std::optional<std::vector<int>> goal;
    TrapSearchLimits trap_limits{};
    bool run_trap_search = true;
};

AnalysisReport analyze(const SwitchedChain& chain, const AnalyzeOptions& options = {});

} // namespace switchmc
