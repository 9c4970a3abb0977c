#include "switchmc/report.hpp"

#include <sstream>

namespace switchmc {

namespace {

using nlohmann::json;

json labels_of(const std::vector<int>& states, const StateSpace& space) {
    json out = json::array();
    for (int s : states)
        out.push_back(space.label(s));
    return out;
}

std::string label_list(const std::vector<int>& states, const StateSpace& space) {
    std::string out = "{";
    for (std::size_t i = 0; i < states.size(); ++i)
        out += (i ? ", " : "") + space.label(states[i]);
    return out + "}";
}

json distances_json(const std::vector<Distance>& distances) {
    json out = json::array();
    for (Distance d : distances) {
        if (d.is_finite())
            out.push_back(d.hops());
        else
            out.push_back("inf");
    }
    return out;
}

std::string distances_text(const std::vector<Distance>& distances, const StateSpace& space) {
    std::string out;
    for (std::size_t i = 0; i < distances.size(); ++i)
        out += (i ? " " : "") + space.label(static_cast<int>(i)) + "=" +
               to_string(distances[i]);
    return out;
}

const char* kind_name(Certificate::Kind kind) {
    switch (kind) {
    case Certificate::Kind::None:
        return "none";
    case Certificate::Kind::Sink:
        return "sink-outside-absorbing-set";
    case Certificate::Kind::NotWeaklyAcyclic:
        return "not-weakly-acyclic";
    case Certificate::Kind::Cycle:
        return "cycle";
    case Certificate::Kind::TopologicalOrder:
        return "topological-order";
    case Certificate::Kind::PathCover:
        return "path-cover";
    case Certificate::Kind::DistanceViolation:
        return "max-distance-violation";
    case Certificate::Kind::MaxDistanceTable:
        return "max-distance-table";
    case Certificate::Kind::AbsorbingSetMismatch:
        return "absorbing-set-mismatch";
    case Certificate::Kind::TrapPolicy:
        return "trap-policy";
    case Certificate::Kind::DistanceTable:
        return "distance-table";
    }
    return "none";
}

} // namespace

json to_json(const RunConfig& config) {
    json out;
    out["subcommand"] = config.subcommand;
    out["model"] = config.model_path;
    out["model_format"] = config.model_format;
    out["output"] = config.output;
    out["concretization"] = config.concretization;
    out["strict"] = config.strict;
    if (!config.goal_labels.empty()) {
        out["goal"] = config.goal_labels;
        out["goal_defaulted"] = config.goal_defaulted;
    }
    if (!config.policy_path.empty())
        out["policy"] = config.policy_path;
    if (!config.signal.empty())
        out["signal"] = config.signal;
    if (!config.init.empty())
        out["init"] = config.init;
    if (config.subcommand == "simulate") {
        out["trials"] = config.trials;
        out["horizon"] = config.horizon;
        out["seed"] = config.seed;
    }
    if (config.subcommand == "synthesize")
        out["tie_break"] = config.tie_break;
    if (config.subcommand == "find-trap")
        out["max_states"] = config.max_states;
    return out;
}

std::string to_text(const RunConfig& config) {
    std::ostringstream out;
    out << "config: subcommand=" << config.subcommand << " model=" << config.model_path
        << " format=" << config.model_format << " concretization=" << config.concretization;
    if (!config.goal_labels.empty()) {
        out << " goal=";
        for (std::size_t i = 0; i < config.goal_labels.size(); ++i)
            out << (i ? "," : "") << config.goal_labels[i];
        if (config.goal_defaulted)
            out << " (defaulted)";
    }
    if (!config.policy_path.empty())
        out << " policy=" << config.policy_path;
    if (!config.signal.empty())
        out << " signal=" << config.signal;
    if (!config.init.empty())
        out << " init=" << config.init;
    if (config.subcommand == "simulate")
        out << " trials=" << config.trials << " horizon=" << config.horizon
            << " seed=" << config.seed;
    if (config.subcommand == "synthesize")
        out << " tie-break=" << config.tie_break;
    if (config.subcommand == "find-trap")
        out << " max-states=" << config.max_states;
    if (config.strict)
        out << " strict";
    return out.str();
}

json to_json(const Certificate& cert, const StateSpace& states) {
    json out;
    out["kind"] = kind_name(cert.kind);
    if (cert.mode >= 0)
        out["mode"] = cert.mode + 1;
    if (cert.mode2 >= 0)
        out["mode2"] = cert.mode2 + 1;
    if (!cert.states.empty())
        out["states"] = labels_of(cert.states, states);
    if (!cert.distances.empty())
        out["distances"] = distances_json(cert.distances);
    if (!cert.paths.empty()) {
        json paths = json::array();
        for (const Path& p : cert.paths)
            paths.push_back(labels_of(p.nodes, states));
        out["paths"] = paths;
    }
    if (cert.policy)
        out["policy"] = policy_json(*cert.policy, states);
    return out;
}

std::string to_text(const Certificate& cert, const StateSpace& states) {
    std::ostringstream out;
    switch (cert.kind) {
    case Certificate::Kind::None:
        out << "none";
        break;
    case Certificate::Kind::Sink:
        out << "sink " << states.label(cert.states.front()) << " lies outside the absorbing set";
        break;
    case Certificate::Kind::NotWeaklyAcyclic:
        if (cert.mode >= 0)
            out << "mode " << cert.mode + 1 << " graph ";
        out << "not weakly acyclic; no path to a sink from " << label_list(cert.states, states);
        break;
    case Certificate::Kind::Cycle: {
        out << "cycle ";
        for (int s : cert.states)
            out << states.label(s) << " -> ";
        out << states.label(cert.states.front());
        break;
    }
    case Certificate::Kind::TopologicalOrder: {
        out << "topological order ";
        for (std::size_t i = 0; i < cert.states.size(); ++i)
            out << (i ? " " : "") << states.label(cert.states[i]);
        break;
    }
    case Certificate::Kind::PathCover: {
        out << "shortest intersection-graph paths:";
        for (const Path& p : cert.paths) {
            out << ' ';
            for (std::size_t i = 0; i < p.nodes.size(); ++i)
                out << (i ? "->" : "") << states.label(p.nodes[i]);
        }
        break;
    }
    case Certificate::Kind::DistanceViolation:
        out << "on mode " << cert.mode + 1 << " graph, state "
            << states.label(cert.states.front())
            << " has no out-neighbor with a smaller max distance (table: "
            << distances_text(cert.distances, states) << ")";
        break;
    case Certificate::Kind::MaxDistanceTable:
        out << "max distances " << distances_text(cert.distances, states);
        break;
    case Certificate::Kind::AbsorbingSetMismatch:
        out << "modes " << cert.mode + 1 << " and " << cert.mode2 + 1
            << " disagree on absorbing state " << states.label(cert.states.front());
        break;
    case Certificate::Kind::TrapPolicy: {
        out << "trap policy (";
        if (cert.policy)
            for (std::size_t i = 0; i < cert.policy->mode_for_state.size(); ++i)
                out << (i ? "," : "") << cert.policy->mode_for_state[i] + 1;
        out << ") strands " << label_list(cert.states, states);
        break;
    }
    case Certificate::Kind::DistanceTable:
        out << "distances " << distances_text(cert.distances, states);
        break;
    }
    return out.str();
}

json model_summary_json(const SwitchedChain& chain) {
    const auto sets = absorbing_sets(chain);
    json out;
    out["states"] = chain.states.labels();
    out["mode_count"] = chain.mode_count();
    json per_mode = json::array();
    for (const auto& s : sets.per_mode)
        per_mode.push_back(labels_of(s, chain.states));
    out["absorbing"] = {{"per_mode", per_mode},
                        {"union", labels_of(sets.union_set, chain.states)},
                        {"intersection", labels_of(sets.intersection_set, chain.states)}};
    return out;
}

std::string model_summary_text(const SwitchedChain& chain) {
    const auto sets = absorbing_sets(chain);
    std::ostringstream out;
    out << "model: " << chain.state_count() << " states, " << chain.mode_count() << " modes\n";
    for (int i = 0; i < chain.mode_count(); ++i)
        out << "  absorbing[" << chain.mode(i).name() << "]: "
            << label_list(sets.per_mode[static_cast<std::size_t>(i)], chain.states) << "\n";
    out << "  absorbing union: " << label_list(sets.union_set, chain.states)
        << "  intersection: " << label_list(sets.intersection_set, chain.states);
    return out.str();
}

namespace {

json edges_json(const DiGraph& g, const StateSpace& states) {
    json out = json::array();
    for (const auto& [from, to] : g.edges())
        out.push_back({states.label(from), states.label(to)});
    return out;
}

} // namespace

json graphs_json(const SwitchedChain& chain) {
    json out;
    json modes = json::array();
    for (const auto& m : chain.modes)
        modes.push_back(edges_json(simplified_graph(m), chain.states));
    out["modes"] = modes;
    out["union"] = edges_json(union_graph(chain), chain.states);
    out["intersection"] = edges_json(intersection_graph(chain), chain.states);
    return out;
}

std::string graphs_text(const SwitchedChain& chain) {
    std::ostringstream out;
    auto edges_line = [&](const DiGraph& g) {
        std::string line;
        for (const auto& [from, to] : g.edges())
            line += (line.empty() ? "" : " ") + chain.states.label(from) + "->" +
                    chain.states.label(to);
        return line.empty() ? std::string("(none)") : line;
    };
    for (int i = 0; i < chain.mode_count(); ++i)
        out << "  graph[" << chain.mode(i).name()
            << "]: " << edges_line(simplified_graph(chain.mode(i))) << "\n";
    out << "  graph union: " << edges_line(union_graph(chain)) << "\n";
    out << "  graph intersection: " << edges_line(intersection_graph(chain));
    return out.str();
}

json to_json(const AnalysisReport& report, const SwitchedChain& chain) {
    const StateSpace& states = chain.states;
    json out;
    out["equal_absorbing_sets"] = report.equal_absorbing_sets;
    if (report.absorbing_set_mismatch)
        out["absorbing_set_mismatch"] = to_json(*report.absorbing_set_mismatch, states);
    if (report.cond1) {
        json conditions;
        auto one = [&](const ConditionVerdict& v) {
            return json{{"holds", v.holds}, {"certificate", to_json(v.certificate, states)}};
        };
        conditions["condition1"] = one(*report.cond1);
        conditions["condition2"] = one(*report.cond2);
        conditions["condition3"] = one(*report.cond3);
        out["conditions"] = conditions;
    }
    json arbitrary;
    arbitrary["verdict"] = to_string(report.arbitrary);
    if (!report.arbitrary_via.empty())
        arbitrary["via"] = report.arbitrary_via;
    if (report.trap)
        arbitrary["trap"] = to_json(*report.trap, states);
    if (!report.note.empty())
        arbitrary["note"] = report.note;
    out["arbitrary_switching"] = arbitrary;
    if (!report.path_probability_bounds.empty()) {
        json bounds;
        for (const auto& [state, bound] : report.path_probability_bounds)
            bounds[states.label(state)] = bound;
        out["path_probability_bounds"] = bounds;
    }
    if (report.stabilizability) {
        const auto& s = *report.stabilizability;
        json sec;
        sec["goal"] = labels_of(s.goal, states);
        sec["stabilizable"] = s.stabilizable;
        sec["distances"] = distances_json(s.distances);
        if (s.max_distance)
            sec["m"] = *s.max_distance;
        out["stabilizability"] = sec;
    }
    return out;
}

std::string to_text(const AnalysisReport& report, const SwitchedChain& chain) {
    const StateSpace& states = chain.states;
    std::ostringstream out;
    out << "equal absorbing sets: " << (report.equal_absorbing_sets ? "yes" : "no") << "\n";
    if (report.absorbing_set_mismatch)
        out << "  " << to_text(*report.absorbing_set_mismatch, states) << "\n";
    if (report.cond1) {
        auto one = [&](const char* name, const ConditionVerdict& v) {
            out << name << ": " << (v.holds ? "holds" : "fails") << " ("
                << to_text(v.certificate, states) << ")\n";
        };
        one("condition 1 (intersection weakly acyclic, sinks absorbing)", *report.cond1);
        one("condition 2 (union acyclic)", *report.cond2);
        one("condition 3 (max distance strictly decreases)", *report.cond3);
    }
    out << "arbitrary switching: " << to_string(report.arbitrary);
    if (!report.arbitrary_via.empty())
        out << " (" << report.arbitrary_via << ")";
    out << "\n";
    if (report.trap)
        out << "  " << to_text(*report.trap, states) << "\n";
    if (!report.note.empty())
        out << "  note: " << report.note << "\n";
    if (!report.path_probability_bounds.empty()) {
        out << "  shortest-path absorption bounds:";
        for (const auto& [state, bound] : report.path_probability_bounds)
            out << ' ' << states.label(state) << ">=" << bound;
        out << "\n";
    }
    if (report.stabilizability) {
        const auto& s = *report.stabilizability;
        out << "stabilizability (goal " << label_list(s.goal, states)
            << "): " << (s.stabilizable ? "stabilizable" : "not stabilizable") << "\n";
        out << "  d_union: " << distances_text(s.distances, states);
        if (s.max_distance)
            out << "  m=" << *s.max_distance;
        out << "\n";
    }
    return out.str();
}

json policy_json(const SwitchingPolicy& policy, const StateSpace& states) {
    json assignment = json::array();
    for (int i = 0; i < policy.size(); ++i)
        assignment.push_back({{"state", states.label(i)}, {"mode", policy.mode_at(i) + 1}});
    return {{"assignment", assignment}};
}

json to_json(const SynthesisResult& result, const SwitchedChain& chain) {
    const StateSpace& states = chain.states;
    json out;
    out["policy"] = policy_json(result.policy, states);
    out["distances"] = distances_json(result.distances);
    json steps = json::array();
    for (const PolicyStep& step : result.certificate) {
        json s;
        s["state"] = states.label(step.state);
        s["mode"] = step.mode + 1;
        if (step.target >= 0) {
            s["target"] = states.label(step.target);
            s["target_distance"] = step.target_distance.hops();
        }
        steps.push_back(s);
    }
    out["certificate"] = steps;
    return out;
}

std::string to_text(const SynthesisResult& result, const SwitchedChain& chain) {
    const StateSpace& states = chain.states;
    std::ostringstream out;
    out << "policy:\n";
    for (int i = 0; i < result.policy.size(); ++i)
        out << "  " << states.label(i) << " " << result.policy.mode_at(i) + 1 << "\n";
    out << "d_union: " << distances_text(result.distances, states) << "\n";
    out << "progress certificate:\n";
    for (const PolicyStep& step : result.certificate) {
        out << "  " << states.label(step.state) << ": mode " << step.mode + 1;
        if (step.target >= 0)
            out << " -> " << states.label(step.target) << " (distance "
                << to_string(step.target_distance) << ")";
        else
            out << " (absorbing)";
        out << "\n";
    }
    return out.str();
}

json to_json(const SimStats& stats, const StateSpace& states) {
    json out;
    out["trials"] = stats.trials;
    out["horizon"] = stats.horizon;
    out["seed"] = stats.seed;
    json fractions;
    for (const auto& [state, fraction] : stats.absorbed_fraction)
        fractions[states.label(state)] = fraction;
    out["absorbed_fraction"] = fractions;
    out["non_absorbed_fraction"] = stats.non_absorbed_fraction;
    out["absorbed_count"] = stats.absorbed_count;
    if (stats.absorbed_count > 0) {
        out["mean_hitting_time"] = stats.mean_hitting_time;
        out["hitting_time_std_error"] = stats.hitting_time_std_error;
    }
    return out;
}

std::string to_text(const SimStats& stats, const StateSpace& states) {
    std::ostringstream out;
    out << "trials=" << stats.trials << " horizon=" << stats.horizon << " seed=" << stats.seed
        << "\n";
    out << "  absorbed: " << stats.absorbed_count << " ("
        << (static_cast<double>(stats.absorbed_count) / static_cast<double>(stats.trials))
        << ")";
    for (const auto& [state, fraction] : stats.absorbed_fraction)
        out << "  at " << states.label(state) << ": " << fraction;
    out << "\n  non-absorbed fraction: " << stats.non_absorbed_fraction << "\n";
    if (stats.absorbed_count > 0)
        out << "  hitting time: mean=" << stats.mean_hitting_time
            << " stderr=" << stats.hitting_time_std_error << "\n";
    return out.str();
}

json expected_times_json(const std::vector<double>& times, const StateSpace& states) {
    json out = json::array();
    for (std::size_t i = 0; i < times.size(); ++i)
        out.push_back({{"state", states.label(static_cast<int>(i))}, {"steps", times[i]}});
    return out;
}

std::string expected_times_text(const std::vector<double>& times, const StateSpace& states) {
    std::ostringstream out;
    out << "expected steps to goal:\n";
    for (std::size_t i = 0; i < times.size(); ++i)
        out << "  " << states.label(static_cast<int>(i)) << ": " << times[i] << "\n";
    return out.str();
}

} // namespace switchmc
