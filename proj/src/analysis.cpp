#include "switchmc/analysis.hpp"

#include "switchmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace switchmc {

std::string to_string(ArbitraryVerdict verdict) {
    switch (verdict) {
    case ArbitraryVerdict::Guaranteed:
        return "GUARANTEED";
    case ArbitraryVerdict::Refuted:
        return "REFUTED";
    case ArbitraryVerdict::Unknown:
        return "UNKNOWN";
    }
    return "UNKNOWN";
}

std::pair<bool, std::vector<Distance>> check_stabilizable(const SwitchedChain& chain,
                                                          std::span<const int> goal) {
    validate_goal_states(chain, goal);
    auto distances = distance_table(union_graph(chain), goal);
    const bool ok = std::ranges::all_of(distances, [](Distance d) { return d.is_finite(); });
    return {ok, std::move(distances)};
}

bool check_equal_absorbing_sets(const SwitchedChain& chain) {
    const auto sets = absorbing_sets(chain);
    for (std::size_t i = 1; i < sets.per_mode.size(); ++i)
        if (sets.per_mode[i] != sets.per_mode.front())
            return false;
    return true;
}

std::optional<Certificate> find_absorbing_set_mismatch(const SwitchedChain& chain) {
    const auto sets = absorbing_sets(chain);
    for (std::size_t i = 0; i < sets.per_mode.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.per_mode.size(); ++j) {
            if (sets.per_mode[i] == sets.per_mode[j])
                continue;
            std::vector<int> diff;
            std::ranges::set_symmetric_difference(sets.per_mode[i], sets.per_mode[j],
                                                  std::back_inserter(diff));
            Certificate cert;
            cert.kind = Certificate::Kind::AbsorbingSetMismatch;
            cert.mode = static_cast<int>(i);
            cert.mode2 = static_cast<int>(j);
            cert.states = {diff.front()};
            return cert;
        }
    }
    return std::nullopt;
}

namespace {

std::vector<int> common_absorbing_or_throw(const SwitchedChain& chain) {
    if (!check_equal_absorbing_sets(chain))
        throw Error("modes do not share one absorbing set; the sufficient conditions "
                    "presume equal sets");
    return absorbing_sets(chain).intersection_set;
}

std::vector<int> unreachable_to_sinks(const DiGraph& g) {
    const auto sink_nodes = sinks(g);
    std::vector<int> bad;
    if (sink_nodes.empty()) {
        for (int v = 0; v < g.node_count(); ++v)
            bad.push_back(v);
        return bad;
    }
    const auto dist = distance_table(g, sink_nodes);
    for (int v = 0; v < g.node_count(); ++v)
        if (!dist[static_cast<std::size_t>(v)].is_finite())
            bad.push_back(v);
    return bad;
}

// lowest-index-first Kahn order; callers only use it when the graph is acyclic
std::vector<int> topological_order(const DiGraph& g) {
    const int n = g.node_count();
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v)
        for (int w : g.out_neighbors(v))
            ++indegree[static_cast<std::size_t>(w)];
    std::vector<int> order;
    std::vector<bool> emitted(static_cast<std::size_t>(n), false);
    while (static_cast<int>(order.size()) < n) {
        int next = -1;
        for (int v = 0; v < n && next < 0; ++v)
            if (!emitted[static_cast<std::size_t>(v)] && indegree[static_cast<std::size_t>(v)] == 0)
                next = v;
        if (next < 0)
            break;
        emitted[static_cast<std::size_t>(next)] = true;
        order.push_back(next);
        for (int w : g.out_neighbors(next))
            --indegree[static_cast<std::size_t>(w)];
    }
    return order;
}

} // namespace

ConditionVerdict check_condition1(const SwitchedChain& chain) {
    const auto star = common_absorbing_or_throw(chain);
    const DiGraph g = intersection_graph(chain);

    for (int s : sinks(g)) {
        if (!std::ranges::binary_search(star, s)) {
            Certificate cert;
            cert.kind = Certificate::Kind::Sink;
            cert.states = {s};
            return {false, std::move(cert)};
        }
    }
    if (!is_weakly_acyclic(g)) {
        Certificate cert;
        cert.kind = Certificate::Kind::NotWeaklyAcyclic;
        cert.states = unreachable_to_sinks(g);
        return {false, std::move(cert)};
    }
    Certificate cert;
    cert.kind = Certificate::Kind::PathCover;
    for (int v = 0; v < chain.state_count(); ++v) {
        if (std::ranges::binary_search(star, v))
            continue;
        auto path = shortest_path_to_set(g, v, star);
        // weak acyclicity with sinks inside the set guarantees a path
        cert.paths.push_back(std::move(*path));
    }
    return {true, std::move(cert)};
}

ConditionVerdict check_condition2(const SwitchedChain& chain) {
    common_absorbing_or_throw(chain);
    const DiGraph g = union_graph(chain);
    if (auto cycle = find_cycle(g)) {
        Certificate cert;
        cert.kind = Certificate::Kind::Cycle;
        cert.states = std::move(*cycle);
        return {false, std::move(cert)};
    }
    Certificate cert;
    cert.kind = Certificate::Kind::TopologicalOrder;
    cert.states = topological_order(g);
    return {true, std::move(cert)};
}

ConditionVerdict check_condition3(const SwitchedChain& chain) {
    const auto star = common_absorbing_or_throw(chain);
    const auto graphs = mode_graphs(chain);

    for (std::size_t m = 0; m < graphs.size(); ++m) {
        if (!is_weakly_acyclic(graphs[m])) {
            Certificate cert;
            cert.kind = Certificate::Kind::NotWeaklyAcyclic;
            cert.mode = static_cast<int>(m);
            cert.states = unreachable_to_sinks(graphs[m]);
            return {false, std::move(cert)};
        }
    }

    const auto dbar = max_distance_table(graphs, star);
    for (std::size_t m = 0; m < graphs.size(); ++m) {
        for (int a = 0; a < chain.state_count(); ++a) {
            if (std::ranges::binary_search(star, a))
                continue;
            bool improves = false;
            for (int b : graphs[m].out_neighbors(a)) {
                if (dbar[static_cast<std::size_t>(b)] < dbar[static_cast<std::size_t>(a)]) {
                    improves = true;
                    break;
                }
            }
            if (!improves) {
                Certificate cert;
                cert.kind = Certificate::Kind::DistanceViolation;
                cert.mode = static_cast<int>(m);
                cert.states = {a};
                cert.distances = dbar;
                return {false, std::move(cert)};
            }
        }
    }
    Certificate cert;
    cert.kind = Certificate::Kind::MaxDistanceTable;
    cert.distances = dbar;
    return {true, std::move(cert)};
}

double absorption_probability_lower_bound(const SwitchedChain& chain, int state) {
    const auto star = common_absorbing_or_throw(chain);
    if (state < 0 || state >= chain.state_count())
        throw Error("state index out of range");
    if (std::ranges::binary_search(star, state))
        throw Error("state '" + chain.states.label(state) + "' is already absorbing");

    const auto path = shortest_path_to_set(intersection_graph(chain), state, star);
    if (!path)
        throw Error("no intersection-graph path from '" + chain.states.label(state) +
                    "' to the absorbing set");
    double min_prob = 1.0;
    for (std::size_t e = 0; e + 1 < path->nodes.size(); ++e) {
        const int i = path->nodes[e];
        const int j = path->nodes[e + 1];
        for (const auto& mode : chain.modes)
            min_prob = std::min(min_prob, mode.at(i, j));
    }
    return std::pow(min_prob, path->length());
}

AnalysisReport analyze(const SwitchedChain& chain, const AnalyzeOptions& options) {
    AnalysisReport report;
    report.absorbing = absorbing_sets(chain);
    report.equal_absorbing_sets = check_equal_absorbing_sets(chain);

    auto run_trap = [&](std::span<const int> target) -> std::optional<Certificate> {
        if (!options.run_trap_search)
            return std::nullopt;
        if (chain.state_count() > options.trap_limits.max_states) {
            report.note = "trap search skipped: " + std::to_string(chain.state_count()) +
                          " states exceed the enumeration limit of " +
                          std::to_string(options.trap_limits.max_states);
            return std::nullopt;
        }
        auto trap = find_trap_policy(chain, target, options.trap_limits);
        if (!trap)
            return std::nullopt;
        Certificate cert;
        cert.kind = Certificate::Kind::TrapPolicy;
        cert.policy = std::move(trap->policy);
        cert.states = std::move(trap->stuck_states);
        return cert;
    };

    if (!report.equal_absorbing_sets) {
        report.absorbing_set_mismatch = find_absorbing_set_mismatch(chain);
        report.arbitrary = ArbitraryVerdict::Refuted;
        report.arbitrary_via = "unequal-absorbing-sets";
        report.trap = run_trap(report.absorbing.intersection_set);
    } else {
        report.cond1 = check_condition1(chain);
        report.cond2 = check_condition2(chain);
        report.cond3 = check_condition3(chain);
        if (report.cond1->holds || report.cond2->holds || report.cond3->holds) {
            report.arbitrary = ArbitraryVerdict::Guaranteed;
            report.arbitrary_via = report.cond1->holds   ? "condition1"
                                   : report.cond2->holds ? "condition2"
                                                         : "condition3";
        } else {
            report.trap = run_trap(report.absorbing.intersection_set);
            if (report.trap) {
                report.arbitrary = ArbitraryVerdict::Refuted;
                report.arbitrary_via = "trap-policy";
            } else {
                report.arbitrary = ArbitraryVerdict::Unknown;
                if (report.note.empty())
                    report.note = "no sufficient condition holds and no state-feedback trap "
                                  "exists; behavior under time-varying signals is undecided";
            }
        }
        if (report.cond1->holds) {
            for (int v = 0; v < chain.state_count(); ++v)
                if (!std::ranges::binary_search(report.absorbing.intersection_set, v))
                    report.path_probability_bounds[v] =
                        absorption_probability_lower_bound(chain, v);
        }
    }

    if (options.goal) {
        auto [ok, distances] = check_stabilizable(chain, *options.goal);
        StabilizabilitySection section;
        section.goal = *options.goal;
        std::ranges::sort(section.goal);
        section.stabilizable = ok;
        section.distances = std::move(distances);
        if (ok) {
            std::int64_t worst = 0;
            for (Distance d : section.distances)
                worst = std::max(worst, d.hops());
            section.max_distance = worst;
        }
        report.stabilizability = std::move(section);
    }
    return report;
}

} // namespace switchmc
