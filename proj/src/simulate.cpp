#include "switchmc/simulate.hpp"

#include "switchmc/errors.hpp"
#include "switchmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace switchmc {

std::string to_string(const SwitchingSignal& signal) {
    std::ostringstream out;
    if (const auto* fixed = std::get_if<FixedMode>(&signal)) {
        out << "mode:" << fixed->mode + 1;
    } else if (const auto* policy = std::get_if<StatePolicy>(&signal)) {
        out << "policy:";
        for (std::size_t i = 0; i < policy->policy.mode_for_state.size(); ++i)
            out << (i ? "," : "") << policy->policy.mode_for_state[i] + 1;
    } else if (const auto* periodic = std::get_if<PeriodicSchedule>(&signal)) {
        out << "schedule:";
        for (std::size_t i = 0; i < periodic->modes.size(); ++i)
            out << (i ? "," : "") << periodic->modes[i] + 1;
    } else if (const auto* random = std::get_if<UniformRandom>(&signal)) {
        out << "random:" << random->seed;
    } else {
        const auto& seq = std::get<ExplicitSequence>(signal);
        out << "sequence:";
        for (std::size_t i = 0; i < seq.modes.size(); ++i)
            out << (i ? "," : "") << seq.modes[i] + 1;
    }
    return out.str();
}

void validate_signal(const SwitchingSignal& signal, const SwitchedChain& chain) {
    const int k = chain.mode_count();
    auto check = [&](int m) {
        if (m < 0 || m >= k)
            throw Error("signal references mode " + std::to_string(m + 1) + " of " +
                        std::to_string(k));
    };
    if (const auto* fixed = std::get_if<FixedMode>(&signal)) {
        check(fixed->mode);
    } else if (const auto* policy = std::get_if<StatePolicy>(&signal)) {
        validate_policy_shape(policy->policy, chain);
    } else if (const auto* periodic = std::get_if<PeriodicSchedule>(&signal)) {
        if (periodic->modes.empty())
            throw Error("schedule is empty");
        for (int m : periodic->modes)
            check(m);
    } else if (const auto* seq = std::get_if<ExplicitSequence>(&signal)) {
        if (seq->modes.empty())
            throw Error("mode sequence is empty");
        for (int m : seq->modes)
            check(m);
    }
}

int signal_mode_at(const SwitchingSignal& signal, int step, int current_state, int mode_count) {
    if (const auto* fixed = std::get_if<FixedMode>(&signal))
        return fixed->mode;
    if (const auto* policy = std::get_if<StatePolicy>(&signal))
        return policy->policy.mode_at(current_state);
    if (const auto* periodic = std::get_if<PeriodicSchedule>(&signal))
        return periodic->modes[static_cast<std::size_t>(step) % periodic->modes.size()];
    if (const auto* random = std::get_if<UniformRandom>(&signal)) {
        std::uint64_t state = derive_seed(random->seed, static_cast<std::uint64_t>(step));
        return static_cast<int>(splitmix64(state) % static_cast<std::uint64_t>(mode_count));
    }
    const auto& seq = std::get<ExplicitSequence>(signal);
    if (step >= static_cast<int>(seq.modes.size()))
        throw Error("mode sequence exhausted at step " + std::to_string(step));
    return seq.modes[static_cast<std::size_t>(step)];
}

Distribution Distribution::unit(int n, int state) {
    if (state < 0 || state >= n)
        throw Error("state index out of range");
    Distribution d;
    d.x.assign(static_cast<std::size_t>(n), 0.0);
    d.x[static_cast<std::size_t>(state)] = 1.0;
    return d;
}

Distribution Distribution::uniform(int n) {
    Distribution d;
    d.x.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    return d;
}

void Distribution::validate() const {
    double sum = 0.0;
    for (double v : x) {
        if (v < 0.0)
            throw Error("distribution has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw Error("distribution sums to " + std::to_string(sum) + ", expected 1");
}

std::vector<Distribution> propagate_distribution(const SwitchedChain& chain,
                                                 const SwitchingSignal& signal,
                                                 const Distribution& x0, int steps) {
    if (steps < 0)
        throw Error("negative step count");
    if (static_cast<int>(x0.x.size()) != chain.state_count())
        throw Error("initial distribution has the wrong dimension");
    x0.validate();
    validate_signal(signal, chain);

    const int n = chain.state_count();
    std::vector<Distribution> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(x0);
    for (int t = 0; t < steps; ++t) {
        const Distribution& cur = out.back();
        Distribution next;
        next.x.assign(static_cast<std::size_t>(n), 0.0);
        if (std::holds_alternative<StatePolicy>(signal)) {
            // state feedback: row i evolves under the mode assigned to i
            for (int i = 0; i < n; ++i) {
                const double mass = cur.x[static_cast<std::size_t>(i)];
                if (mass == 0.0)
                    continue;
                const Mode& mode = chain.mode(signal_mode_at(signal, t, i, chain.mode_count()));
                for (int j = 0; j < n; ++j)
                    next.x[static_cast<std::size_t>(j)] += mass * mode.at(i, j);
            }
        } else {
            const Mode& mode = chain.mode(signal_mode_at(signal, t, -1, chain.mode_count()));
            for (int i = 0; i < n; ++i) {
                const double mass = cur.x[static_cast<std::size_t>(i)];
                if (mass == 0.0)
                    continue;
                for (int j = 0; j < n; ++j)
                    next.x[static_cast<std::size_t>(j)] += mass * mode.at(i, j);
            }
        }
        next.validate();
        out.push_back(std::move(next));
    }
    return out;
}

namespace {

struct TrialOutcome {
    bool absorbed = false;
    int step = 0;
    int state = -1;
};

int sample_row(const Mode& mode, int state, double u) {
    const int n = mode.size();
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        acc += mode.at(state, j);
        if (u < acc)
            return j;
    }
    // guard against accumulated round-off at u ~ 1
    for (int j = n - 1; j >= 0; --j)
        if (mode.at(state, j) > 0.0)
            return j;
    return n - 1;
}

std::vector<bool> absorption_mask(const SwitchedChain& chain,
                                  const std::optional<std::vector<int>>& goal) {
    if (goal)
        return [&] {
            std::vector<bool> mask(static_cast<std::size_t>(chain.state_count()), false);
            for (int g : *goal) {
                if (g < 0 || g >= chain.state_count())
                    throw Error("goal state index out of range");
                mask[static_cast<std::size_t>(g)] = true;
            }
            return mask;
        }();
    std::vector<bool> mask(static_cast<std::size_t>(chain.state_count()), false);
    for (int s : absorbing_sets(chain).intersection_set)
        mask[static_cast<std::size_t>(s)] = true;
    return mask;
}

TrialOutcome run_one(const SwitchedChain& chain, const SwitchingSignal& signal, int init,
                     int horizon, const std::vector<bool>& absorbed_mask,
                     std::uint64_t master_seed, std::uint64_t trial_index,
                     std::vector<int>* states_out) {
    std::mt19937_64 rng(derive_seed(master_seed, trial_index));
    int state = init;
    if (states_out)
        states_out->push_back(state);
    if (absorbed_mask[static_cast<std::size_t>(state)])
        return {true, 0, state};
    for (int t = 0; t < horizon; ++t) {
        const int mode_index = signal_mode_at(signal, t, state, chain.mode_count());
        state = sample_row(chain.mode(mode_index), state, canonical_double(rng()));
        if (states_out)
            states_out->push_back(state);
        if (absorbed_mask[static_cast<std::size_t>(state)])
            return {true, t + 1, state};
    }
    return {false, horizon, state};
}

} // namespace

Trajectory run_trajectory(const SwitchedChain& chain, const SwitchingSignal& signal, int init,
                          int horizon, std::uint64_t master_seed, std::uint64_t trial_index,
                          const std::optional<std::vector<int>>& goal) {
    if (horizon < 0)
        throw Error("negative horizon");
    if (init < 0 || init >= chain.state_count())
        throw Error("initial state index out of range");
    validate_signal(signal, chain);

    const auto mask = absorption_mask(chain, goal);
    Trajectory trajectory;
    const auto outcome =
        run_one(chain, signal, init, horizon, mask, master_seed, trial_index, &trajectory.states);
    if (outcome.absorbed)
        trajectory.absorbed_at = {outcome.step, outcome.state};
    return trajectory;
}

SimStats estimate_absorption(const SwitchedChain& chain, const SwitchingSignal& signal, int init,
                             const SimConfig& config) {
    if (config.trials < 1)
        throw Error("trial count must be at least 1");
    if (config.horizon < 0)
        throw Error("negative horizon");
    if (init < 0 || init >= chain.state_count())
        throw Error("initial state index out of range");
    validate_signal(signal, chain);

    const auto mask = absorption_mask(chain, config.goal);
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));

    auto worker = [&](long long begin, long long end) {
        for (long long t = begin; t < end; ++t)
            outcomes[static_cast<std::size_t>(t)] =
                run_one(chain, signal, init, config.horizon, mask, config.seed,
                        static_cast<std::uint64_t>(t), nullptr);
    };

    // Trials are independent; per-trial seeding makes the outcome vector
    // identical for any thread count, and the reduction below runs in trial
    // order.
    const long long min_chunk = 4096;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const long long want = (config.trials + min_chunk - 1) / min_chunk;
    const long long n_threads = std::min<long long>(hw, std::max<long long>(1, want));
    if (n_threads <= 1) {
        worker(0, config.trials);
    } else {
        std::vector<std::thread> pool;
        const long long chunk = (config.trials + n_threads - 1) / n_threads;
        for (long long t = 0; t < n_threads; ++t) {
            const long long begin = t * chunk;
            const long long end = std::min(config.trials, begin + chunk);
            if (begin < end)
                pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool)
            th.join();
    }

    SimStats stats;
    stats.trials = config.trials;
    stats.horizon = config.horizon;
    stats.seed = config.seed;

    std::map<int, long long> counts;
    double time_sum = 0.0;
    for (const auto& o : outcomes) {
        if (!o.absorbed)
            continue;
        ++counts[o.state];
        ++stats.absorbed_count;
        time_sum += static_cast<double>(o.step);
    }
    for (const auto& [state, count] : counts)
        stats.absorbed_fraction[state] =
            static_cast<double>(count) / static_cast<double>(config.trials);
    stats.non_absorbed_fraction =
        static_cast<double>(config.trials - stats.absorbed_count) /
        static_cast<double>(config.trials);

    if (stats.absorbed_count > 0) {
        stats.mean_hitting_time = time_sum / static_cast<double>(stats.absorbed_count);
        if (stats.absorbed_count > 1) {
            double sq = 0.0;
            for (const auto& o : outcomes) {
                if (!o.absorbed)
                    continue;
                const double d = static_cast<double>(o.step) - stats.mean_hitting_time;
                sq += d * d;
            }
            const double sample_var = sq / static_cast<double>(stats.absorbed_count - 1);
            stats.hitting_time_std_error =
                std::sqrt(sample_var / static_cast<double>(stats.absorbed_count));
        }
    }
    return stats;
}

std::optional<TrapCertificate> find_trap_policy(const SwitchedChain& chain,
                                                std::span<const int> target,
                                                const TrapSearchLimits& limits) {
    const int n = chain.state_count();
    const int k = chain.mode_count();
    if (n > limits.max_states)
        throw Error("trap search limit exceeded: " + std::to_string(n) + " states > " +
                    std::to_string(limits.max_states) +
                    " (raise the limit to search k^n assignments)");

    std::vector<bool> target_mask(static_cast<std::size_t>(n), false);
    for (int s : target) {
        if (s < 0 || s >= n)
            throw Error("target state index out of range");
        target_mask[static_cast<std::size_t>(s)] = true;
    }

    // Reachability towards the target never depends on rows of target
    // states, so only the other states are enumerated. Ascending
    // lexicographic order keeps the certificate reproducible.
    std::vector<int> free_states;
    for (int i = 0; i < n; ++i)
        if (!target_mask[static_cast<std::size_t>(i)])
            free_states.push_back(i);

    // out-neighbors per (state, mode), excluding self-loops
    std::vector<std::vector<std::vector<int>>> nbrs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        nbrs[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(k));
        for (int s = 0; s < k; ++s)
            for (int j = 0; j < n; ++j)
                if (i != j && chain.mode(s).at(i, j) > 0.0)
                    nbrs[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)].push_back(j);
    }

    std::vector<int> assignment(free_states.size(), 0);
    std::vector<int> stuck;
    std::vector<bool> reaches(static_cast<std::size_t>(n));
    auto is_trap = [&] {
        // reverse reachability from the target under the assigned rows
        std::fill(reaches.begin(), reaches.end(), false);
        std::vector<int> stack;
        for (int s = 0; s < n; ++s)
            if (target_mask[static_cast<std::size_t>(s)]) {
                reaches[static_cast<std::size_t>(s)] = true;
                stack.push_back(s);
            }
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (std::size_t f = 0; f < free_states.size(); ++f) {
                const int u = free_states[f];
                if (reaches[static_cast<std::size_t>(u)])
                    continue;
                const auto& out =
                    nbrs[static_cast<std::size_t>(u)][static_cast<std::size_t>(assignment[f])];
                if (std::ranges::binary_search(out, v)) {
                    reaches[static_cast<std::size_t>(u)] = true;
                    stack.push_back(u);
                }
            }
        }
        stuck.clear();
        for (int s = 0; s < n; ++s)
            if (!reaches[static_cast<std::size_t>(s)])
                stuck.push_back(s);
        return !stuck.empty();
    };

    auto build_certificate = [&] {
        TrapCertificate cert;
        cert.policy.mode_for_state.assign(static_cast<std::size_t>(n), 0);
        for (std::size_t f = 0; f < free_states.size(); ++f)
            cert.policy.mode_for_state[static_cast<std::size_t>(free_states[f])] = assignment[f];
        // The mode at a target state never affects the certificate; keep the
        // state absorbing there when possible, preferring the last such mode.
        for (int s : target) {
            int pick = 0;
            for (int m = 0; m < k; ++m)
                if (chain.mode(m).is_absorbing_state(s))
                    pick = m;
            cert.policy.mode_for_state[static_cast<std::size_t>(s)] = pick;
        }
        cert.stuck_states = stuck;
        return cert;
    };

    while (true) {
        if (is_trap())
            return build_certificate();
        // next assignment in ascending lexicographic order
        int pos = static_cast<int>(assignment.size()) - 1;
        while (pos >= 0 && assignment[static_cast<std::size_t>(pos)] == k - 1)
            assignment[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0)
            return std::nullopt;
        ++assignment[static_cast<std::size_t>(pos)];
    }
}

} // namespace switchmc
