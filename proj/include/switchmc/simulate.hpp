#pragma once

#include "switchmc/model.hpp"
#include "switchmc/policy.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace switchmc {

// Mode selectors driving the dynamics. A UniformRandom signal is a
// reproducible random sequence derived from its seed: mode(t) is a pure
// function of (seed, t), shared by every trial that uses the signal.
struct FixedMode {
    int mode = 0;
};
struct StatePolicy {
    SwitchingPolicy policy;
};
struct PeriodicSchedule {
    std::vector<int> modes; // repeats from the start when exhausted
};
struct UniformRandom {
    std::uint64_t seed = 0;
};
struct ExplicitSequence {
    std::vector<int> modes; // running past the end is an error
};
using SwitchingSignal =
    std::variant<FixedMode, StatePolicy, PeriodicSchedule, UniformRandom, ExplicitSequence>;

std::string to_string(const SwitchingSignal& signal);
void validate_signal(const SwitchingSignal& signal, const SwitchedChain& chain);
int signal_mode_at(const SwitchingSignal& signal, int step, int current_state, int mode_count);

struct Distribution {
    std::vector<double> x; // entries >= 0, sum 1 within 1e-12

    static Distribution unit(int n, int state);
    static Distribution uniform(int n);
    void validate() const;
};

/// Exact evolution x^T(t+1) = x^T(t) P_{sigma(t)}; returns x(0..steps).
std::vector<Distribution> propagate_distribution(const SwitchedChain& chain,
                                                 const SwitchingSignal& signal,
                                                 const Distribution& x0, int steps);

struct Trajectory {
    std::vector<int> states;                        // a(0..T)
    std::optional<std::pair<int, int>> absorbed_at; // (step, state)
};

/// One sampled path. Reproducible: the per-trial generator is derived from
/// (master_seed, trial_index) alone, so results do not depend on execution
/// order. Absorption is recorded on first entry into the common absorbing
/// set, or into `goal` when one is supplied.
Trajectory run_trajectory(const SwitchedChain& chain, const SwitchingSignal& signal, int init,
                          int horizon, std::uint64_t master_seed, std::uint64_t trial_index,
                          const std::optional<std::vector<int>>& goal = std::nullopt);

struct SimConfig {
    long long trials = 10'000;
    int horizon = 1'000;
    std::uint64_t seed = 0;
    std::optional<std::vector<int>> goal;
};

struct SimStats {
    long long trials = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
    std::map<int, double> absorbed_fraction; // by absorbing state
    double non_absorbed_fraction = 0.0;
    long long absorbed_count = 0;
    double mean_hitting_time = 0.0;      // among absorbed trials; 0 when none
    double hitting_time_std_error = 0.0; // sample std / sqrt(count)
};

/// Monte Carlo aggregate over independent trials; deterministic for a given
/// config seed regardless of thread count.
SimStats estimate_absorption(const SwitchedChain& chain, const SwitchingSignal& signal, int init,
                             const SimConfig& config);

struct TrapSearchLimits {
    int max_states = 12; // k^n enumeration guard
};

/// A policy whose induced chain cannot reach `target` from some state,
/// together with the states it strands. Refutes absorption under arbitrary
/// switching.
struct TrapCertificate {
    SwitchingPolicy policy;
    std::vector<int> stuck_states;
};

/// Exhaustive state-feedback search in ascending lexicographic order over
/// the states outside `target` (mode choices at target states cannot affect
/// reachability to it). Returns the first trap found, or nullopt when every
/// induced chain reaches the target from everywhere.
std::optional<TrapCertificate> find_trap_policy(const SwitchedChain& chain,
                                                std::span<const int> target,
                                                const TrapSearchLimits& limits = {});

} // namespace switchmc
