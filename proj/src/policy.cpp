#include "switchmc/policy.hpp"

#include "switchmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace switchmc {

namespace {

std::vector<bool> as_mask(int n, std::span<const int> states) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (int s : states) {
        if (s < 0 || s >= n)
            throw Error("state index out of range");
        mask[static_cast<std::size_t>(s)] = true;
    }
    return mask;
}

} // namespace

void validate_policy_shape(const SwitchingPolicy& policy, const SwitchedChain& chain) {
    if (policy.size() != chain.state_count())
        throw Error("policy does not assign a mode to every state");
    for (int m : policy.mode_for_state)
        if (m < 0 || m >= chain.mode_count())
            throw Error("policy references mode " + std::to_string(m + 1) + " of " +
                        std::to_string(chain.mode_count()));
}

std::string to_string(const TieBreak& tie_break) {
    if (std::holds_alternative<TieBreakLowest>(tie_break))
        return "lowest";
    return "seeded:" + std::to_string(std::get<TieBreakSeeded>(tie_break).seed);
}

TieBreak parse_tie_break(std::string_view text) {
    if (text == "lowest")
        return TieBreakLowest{};
    constexpr std::string_view prefix = "seeded:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string digits(text.substr(prefix.size()));
        try {
            std::size_t used = 0;
            std::uint64_t seed = std::stoull(digits, &used);
            if (used == digits.size())
                return TieBreakSeeded{seed};
        } catch (const std::exception&) {
        }
    }
    throw Error("unknown tie-break '" + std::string(text) +
                "' (expected 'lowest' or 'seeded:<n>')");
}

std::vector<int> closer_set(const SwitchedChain& chain, std::span<const int> goal, int state) {
    validate_goal_states(chain, goal);
    if (state < 0 || state >= chain.state_count())
        throw Error("state index out of range");
    const auto dist = distance_table(union_graph(chain), goal);
    const Distance mine = dist[static_cast<std::size_t>(state)];
    std::vector<int> closer;
    for (int j = 0; j < chain.state_count(); ++j)
        if (dist[static_cast<std::size_t>(j)] < mine)
            closer.push_back(j);
    return closer;
}

SynthesisResult synthesize_policy(const SwitchedChain& chain, std::span<const int> goal,
                                  const TieBreak& tie_break) {
    validate_goal_states(chain, goal);
    const int n = chain.state_count();
    const int k = chain.mode_count();
    const auto dist = distance_table(union_graph(chain), goal);

    std::vector<int> unreachable;
    for (int i = 0; i < n; ++i)
        if (!dist[static_cast<std::size_t>(i)].is_finite())
            unreachable.push_back(i);
    if (!unreachable.empty()) {
        std::string names;
        for (int i : unreachable)
            names += (names.empty() ? "" : ", ") + chain.states.label(i);
        throw UnstabilizableError(
            "goal is unreachable on the union graph from: " + names, std::move(unreachable));
    }

    std::mt19937_64 rng(std::holds_alternative<TieBreakSeeded>(tie_break)
                            ? std::get<TieBreakSeeded>(tie_break).seed
                            : 0);
    auto choose = [&](const std::vector<int>& candidates) {
        if (std::holds_alternative<TieBreakLowest>(tie_break))
            return candidates.front();
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        return candidates[pick(rng)];
    };

    const auto goal_mask = as_mask(n, goal);
    SynthesisResult result;
    result.distances = dist;
    result.policy.mode_for_state.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        std::vector<int> candidates;
        if (goal_mask[static_cast<std::size_t>(i)]) {
            for (int s = 0; s < k; ++s)
                if (chain.mode(s).is_absorbing_state(i))
                    candidates.push_back(s);
            // nonempty because the goal is inside the union absorbing set
            const int mode = choose(candidates);
            result.policy.mode_for_state[static_cast<std::size_t>(i)] = mode;
            result.certificate.push_back({i, mode, -1, Distance::of(0)});
            continue;
        }
        for (int s = 0; s < k; ++s) {
            bool reaches_closer = false;
            for (int j = 0; j < n && !reaches_closer; ++j)
                reaches_closer = chain.mode(s).at(i, j) > 0.0 &&
                                 dist[static_cast<std::size_t>(j)] < dist[static_cast<std::size_t>(i)];
            if (reaches_closer)
                candidates.push_back(s);
        }
        // nonempty: otherwise no mode ever moves i closer and the BFS
        // distance of i could not have been finite
        const int mode = choose(candidates);
        int target = -1;
        for (int j = 0; j < n; ++j) {
            if (chain.mode(mode).at(i, j) <= 0.0 ||
                !(dist[static_cast<std::size_t>(j)] < dist[static_cast<std::size_t>(i)]))
                continue;
            if (target < 0 || dist[static_cast<std::size_t>(j)] < dist[static_cast<std::size_t>(target)])
                target = j;
        }
        result.policy.mode_for_state[static_cast<std::size_t>(i)] = mode;
        result.certificate.push_back(
            {i, mode, target, dist[static_cast<std::size_t>(target)]});
    }
    return result;
}

InducedChain induced_chain(const SwitchedChain& chain, const SwitchingPolicy& policy) {
    validate_policy_shape(policy, chain);
    const int n = chain.state_count();
    std::vector<double> q(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    std::vector<int> absorbing;
    for (int i = 0; i < n; ++i) {
        const Mode& source = chain.mode(policy.mode_at(i));
        for (int j = 0; j < n; ++j)
            q[static_cast<std::size_t>(i * n + j)] = source.at(i, j);
        if (source.is_absorbing_state(i))
            absorbing.push_back(i);
    }
    return InducedChain{Mode(n, std::move(q), std::move(absorbing), "induced"), policy};
}

bool validate_policy(const SwitchedChain& chain, const SwitchingPolicy& policy,
                     std::span<const int> goal) {
    validate_policy_shape(policy, chain);
    if (goal.empty())
        return false;
    for (int g : goal) {
        if (g < 0 || g >= chain.state_count())
            throw Error("goal state index out of range");
        if (!chain.mode(policy.mode_at(g)).is_absorbing_state(g))
            return false;
    }
    const auto induced = induced_chain(chain, policy);
    const auto dist = distance_table(simplified_graph(induced.mode), goal);
    return std::ranges::all_of(dist, [](Distance d) { return d.is_finite(); });
}

namespace {

// Solve A x = b by LU factorization with partial pivoting; returns false on
// a vanishing pivot. A is overwritten.
bool lu_solve(std::vector<double>& a, std::vector<double>& x, std::vector<double> b, int n) {
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * n + j)]; };
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        perm[static_cast<std::size_t>(i)] = i;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(at(r, col)) > std::abs(at(pivot, col)))
                pivot = r;
        if (std::abs(at(pivot, col)) < 1e-300)
            return false;
        if (pivot != col) {
            for (int j = 0; j < n; ++j)
                std::swap(at(pivot, j), at(col, j));
            std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = at(r, col) / at(col, col);
            at(r, col) = 0.0;
            for (int j = col + 1; j < n; ++j)
                at(r, j) -= f * at(col, j);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    x.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[static_cast<std::size_t>(r)];
        for (int j = r + 1; j < n; ++j)
            acc -= at(r, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(r)] = acc / at(r, r);
    }
    return true;
}

struct TransientSystem {
    std::vector<int> transient;          // ascending state indices
    std::vector<int> position;           // state -> row in the transient block, or -1
    std::vector<double> q;               // transient-to-transient block, row-major
};

TransientSystem transient_system(const Mode& q, std::span<const int> inside) {
    const int n = q.size();
    TransientSystem sys;
    sys.position.assign(static_cast<std::size_t>(n), -1);
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (int s : inside)
        mask[static_cast<std::size_t>(s)] = true;
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) {
            sys.position[static_cast<std::size_t>(i)] = static_cast<int>(sys.transient.size());
            sys.transient.push_back(i);
        }
    }
    const int m = static_cast<int>(sys.transient.size());
    sys.q.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            sys.q[static_cast<std::size_t>(r * m + c)] =
                q.at(sys.transient[static_cast<std::size_t>(r)],
                     sys.transient[static_cast<std::size_t>(c)]);
    return sys;
}

void require_all_reach(const Mode& q, std::span<const int> targets, const char* what) {
    const auto dist = distance_table(simplified_graph(q), targets);
    std::string stuck;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (!dist[i].is_finite())
            stuck += (stuck.empty() ? "" : ", ") + std::to_string(i + 1);
    if (!stuck.empty())
        throw Error(std::string(what) + ": no path to the target set from state(s) " + stuck);
}

// t = 1 + Q_T t, iterated to the documented 1e-12 tolerance.
std::vector<double> value_iteration(const std::vector<double>& q, int m,
                                    const std::vector<double>& rhs) {
    std::vector<double> t(static_cast<std::size_t>(m), 0.0);
    std::vector<double> next(static_cast<std::size_t>(m), 0.0);
    for (long long iter = 0; iter < 100'000'000LL; ++iter) {
        double delta = 0.0;
        for (int r = 0; r < m; ++r) {
            double acc = rhs[static_cast<std::size_t>(r)];
            for (int c = 0; c < m; ++c)
                acc += q[static_cast<std::size_t>(r * m + c)] * t[static_cast<std::size_t>(c)];
            next[static_cast<std::size_t>(r)] = acc;
            delta = std::max(delta, std::abs(acc - t[static_cast<std::size_t>(r)]));
        }
        t.swap(next);
        if (delta < 1e-12)
            return t;
    }
    throw Error("value iteration failed to converge");
}

std::vector<double> solve_transient(const std::vector<double>& q_block, int m,
                                    const std::vector<double>& rhs) {
    // (I - Q_T) x = rhs
    std::vector<double> a(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            a[static_cast<std::size_t>(r * m + c)] =
                (r == c ? 1.0 : 0.0) - q_block[static_cast<std::size_t>(r * m + c)];

    std::vector<double> x;
    bool ok = lu_solve(a, x, rhs, m);
    if (ok) {
        double residual = 0.0;
        double scale = 1.0;
        for (int r = 0; r < m; ++r) {
            double acc = -rhs[static_cast<std::size_t>(r)];
            acc += x[static_cast<std::size_t>(r)];
            for (int c = 0; c < m; ++c)
                acc -= q_block[static_cast<std::size_t>(r * m + c)] * x[static_cast<std::size_t>(c)];
            residual = std::max(residual, std::abs(acc));
            scale = std::max(scale, std::abs(x[static_cast<std::size_t>(r)]));
        }
        if (residual <= 1e-10 * scale)
            return x;
    }
    return value_iteration(q_block, m, rhs);
}

} // namespace

std::vector<double> expected_absorption_time(const InducedChain& induced,
                                             std::span<const int> goal) {
    const Mode& q = induced.mode;
    if (goal.empty())
        throw Error("goal set is empty");
    for (int g : goal)
        if (g < 0 || g >= q.size())
            throw Error("goal state index out of range");
    require_all_reach(q, goal, "expected absorption time");

    const auto sys = transient_system(q, goal);
    const int m = static_cast<int>(sys.transient.size());
    std::vector<double> times(static_cast<std::size_t>(q.size()), 0.0);
    if (m == 0)
        return times;
    const std::vector<double> ones(static_cast<std::size_t>(m), 1.0);
    const auto t = solve_transient(sys.q, m, ones);
    for (int r = 0; r < m; ++r)
        times[static_cast<std::size_t>(sys.transient[static_cast<std::size_t>(r)])] =
            t[static_cast<std::size_t>(r)];
    return times;
}

double AbsorptionProbabilities::at_state(int state, int absorbing_state) const {
    auto it = std::ranges::find(absorbing, absorbing_state);
    if (it == absorbing.end())
        throw Error("state is not a column of the absorption matrix");
    return at(state, static_cast<int>(it - absorbing.begin()));
}

AbsorptionProbabilities absorption_probabilities(const InducedChain& induced,
                                                 std::span<const int> absorbing) {
    const Mode& q = induced.mode;
    if (absorbing.empty())
        throw Error("absorbing set is empty");
    std::vector<int> columns(absorbing.begin(), absorbing.end());
    std::ranges::sort(columns);
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
    for (int a : columns) {
        if (a < 0 || a >= q.size())
            throw Error("absorbing state index out of range");
        if (!q.is_absorbing_state(a))
            throw Error("state '" + std::to_string(a + 1) +
                        "' is not absorbing in the induced chain");
    }
    require_all_reach(q, columns, "absorption probabilities");

    const auto sys = transient_system(q, columns);
    const int m = static_cast<int>(sys.transient.size());
    const int cols = static_cast<int>(columns.size());

    AbsorptionProbabilities out;
    out.absorbing = columns;
    out.prob.assign(static_cast<std::size_t>(q.size()) * static_cast<std::size_t>(cols), 0.0);
    for (int c = 0; c < cols; ++c)
        out.prob[static_cast<std::size_t>(columns[static_cast<std::size_t>(c)]) *
                     static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)] = 1.0;

    for (int c = 0; c < cols; ++c) {
        std::vector<double> rhs(static_cast<std::size_t>(m));
        for (int r = 0; r < m; ++r)
            rhs[static_cast<std::size_t>(r)] =
                q.at(sys.transient[static_cast<std::size_t>(r)], columns[static_cast<std::size_t>(c)]);
        if (m == 0)
            continue;
        const auto b = solve_transient(sys.q, m, rhs);
        for (int r = 0; r < m; ++r)
            out.prob[static_cast<std::size_t>(sys.transient[static_cast<std::size_t>(r)]) *
                         static_cast<std::size_t>(cols) +
                     static_cast<std::size_t>(c)] = b[static_cast<std::size_t>(r)];
    }

    for (int i = 0; i < q.size(); ++i) {
        double sum = 0.0;
        for (int c = 0; c < cols; ++c)
            sum += out.at(i, c);
        if (std::abs(sum - 1.0) > 1e-10)
            throw Error("absorption probabilities row " + std::to_string(i + 1) +
                        " sums to " + std::to_string(sum));
    }
    return out;
}

std::string serialize_policy(const SwitchingPolicy& policy, const StateSpace& states) {
    if (policy.size() != states.size())
        throw Error("policy does not assign a mode to every state");
    std::ostringstream out;
    for (int i = 0; i < states.size(); ++i)
        out << states.label(i) << ' ' << policy.mode_at(i) + 1 << '\n';
    return out.str();
}

SwitchingPolicy parse_policy(std::string_view text, const StateSpace& states, int mode_count) {
    SwitchingPolicy policy;
    policy.mode_for_state.assign(static_cast<std::size_t>(states.size()), -1);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        std::istringstream fields(line);
        std::string label;
        if (!(fields >> label))
            continue;
        long long mode = 0;
        std::string extra;
        if (!(fields >> mode) || (fields >> extra))
            throw ParseError("expected '<state> <mode-index>'", line_no, 1);
        auto state = states.index_of(label);
        if (!state)
            throw ParseError("unknown state label '" + label + "'", line_no, 1);
        if (mode < 1 || mode > mode_count)
            throw ParseError("mode index " + std::to_string(mode) + " outside 1.." +
                                 std::to_string(mode_count),
                             line_no, 1);
        if (policy.mode_for_state[static_cast<std::size_t>(*state)] != -1)
            throw ParseError("state '" + label + "' assigned twice", line_no, 1);
        policy.mode_for_state[static_cast<std::size_t>(*state)] = static_cast<int>(mode - 1);
    }
    for (int i = 0; i < states.size(); ++i)
        if (policy.mode_for_state[static_cast<std::size_t>(i)] == -1)
            throw Error("policy file does not assign a mode to state '" + states.label(i) + "'");
    return policy;
}

SwitchingPolicy load_policy(const std::string& path, const StateSpace& states, int mode_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open policy file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_policy(buffer.str(), states, mode_count);
}

} // namespace switchmc
