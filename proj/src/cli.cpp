#include "switchmc/cli.hpp"

#include "switchmc/analysis.hpp"
#include "switchmc/errors.hpp"
#include "switchmc/model.hpp"
#include "switchmc/policy.hpp"
#include "switchmc/report.hpp"
#include "switchmc/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace switchmc::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitInput = 2;

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::vector<int> resolve_labels(const std::vector<std::string>& labels, const StateSpace& states) {
    std::vector<int> out;
    for (const auto& label : labels) {
        auto index = states.index_of(label);
        if (!index)
            throw Error("unknown state label '" + label + "'");
        out.push_back(*index);
    }
    std::ranges::sort(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SwitchingSignal parse_signal(const std::string& spec, const SwitchedChain& chain,
                             std::uint64_t seed) {
    auto after = [&](std::string_view prefix) {
        return spec.substr(prefix.size());
    };
    if (spec.rfind("policy:", 0) == 0) {
        auto policy = load_policy(after("policy:"), chain.states, chain.mode_count());
        return StatePolicy{std::move(policy)};
    }
    if (spec.rfind("mode:", 0) == 0) {
        int mode = 0;
        try {
            mode = std::stoi(after("mode:"));
        } catch (const std::exception&) {
            throw Error("malformed signal '" + spec + "': expected mode:<index>");
        }
        if (mode < 1 || mode > chain.mode_count())
            throw Error("signal mode index " + std::to_string(mode) + " outside 1.." +
                        std::to_string(chain.mode_count()));
        return FixedMode{mode - 1};
    }
    if (spec == "random")
        return UniformRandom{seed};
    if (spec.rfind("random:", 0) == 0) {
        try {
            return UniformRandom{std::stoull(after("random:"))};
        } catch (const std::exception&) {
            throw Error("malformed signal '" + spec + "': expected random:<seed>");
        }
    }
    if (spec.rfind("schedule:", 0) == 0) {
        const std::string path = after("schedule:");
        std::ifstream in(path);
        if (!in)
            throw Error("cannot open schedule file '" + path + "'");
        PeriodicSchedule schedule;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line = line.substr(0, hash);
            std::istringstream fields(line);
            long long mode = 0;
            if (!(fields >> mode))
                continue;
            if (mode < 1 || mode > chain.mode_count())
                throw ParseError("mode index outside 1.." + std::to_string(chain.mode_count()),
                                 line_no, 1);
            schedule.modes.push_back(static_cast<int>(mode - 1));
        }
        if (schedule.modes.empty())
            throw Error("schedule file '" + path + "' lists no modes");
        return schedule;
    }
    throw Error("malformed signal '" + spec +
                "': expected policy:<file>, mode:<i>, random[:<seed>] or schedule:<file>");
}

void export_graphs(const SwitchedChain& chain, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto& labels = chain.states.labels();
    const auto star = absorbing_sets(chain).intersection_set;
    auto write = [&](const std::string& stem, const DiGraph& g) {
        std::ofstream txt(fs::path(dir) / (stem + ".txt"));
        txt << to_edge_list(g, labels);
        std::ofstream dot(fs::path(dir) / (stem + ".dot"));
        dot << to_dot(g, labels, star, stem);
    };
    for (int i = 0; i < chain.mode_count(); ++i)
        write("mode" + std::to_string(i + 1), simplified_graph(chain.mode(i)));
    write("union", union_graph(chain));
    write("intersection", intersection_graph(chain));
}

struct LoadedModel {
    ModelSpec spec;
    SwitchedChain chain;
};

LoadedModel load(const RunConfig& config) {
    ModelSpec spec = load_model(config.model_path, config.model_format);
    SwitchedChain chain = concretize(spec, parse_fill_strategy(config.concretization));
    return {std::move(spec), std::move(chain)};
}

int run_analyze(RunConfig& config, const std::string& export_dir, std::ostream& out) {
    auto [spec, chain] = load(config);

    AnalyzeOptions options;
    options.trap_limits.max_states = config.max_states;
    if (!config.goal_labels.empty()) {
        options.goal = resolve_labels(config.goal_labels, chain.states);
    } else {
        // under arbitrary switching only common absorbing states can be a
        // meaningful goal; fall back to them when present
        const auto star = absorbing_sets(chain).intersection_set;
        if (!star.empty()) {
            options.goal = star;
            config.goal_defaulted = true;
            for (int s : star)
                config.goal_labels.push_back(chain.states.label(s));
        }
    }

    const AnalysisReport report = analyze(chain, options);
    if (!export_dir.empty())
        export_graphs(chain, export_dir);

    if (config.output == "json") {
        json doc;
        doc["config"] = to_json(config);
        doc["model"] = model_summary_json(chain);
        doc["graphs"] = graphs_json(chain);
        doc["analysis"] = to_json(report, chain);
        out << doc.dump(2) << "\n";
    } else {
        out << to_text(config) << "\n";
        out << model_summary_text(chain) << "\n";
        out << graphs_text(chain) << "\n";
        out << to_text(report, chain);
    }

    const bool refuted = report.arbitrary == ArbitraryVerdict::Refuted;
    const bool unstabilizable =
        report.stabilizability && !report.stabilizability->stabilizable;
    if (config.strict && (refuted || unstabilizable))
        return kExitVerdict;
    return kExitOk;
}

int run_synthesize(RunConfig& config, const std::string& out_path, std::ostream& out) {
    auto [spec, chain] = load(config);
    const auto goal = resolve_labels(config.goal_labels, chain.states);

    try {
        const SynthesisResult result =
            synthesize_policy(chain, goal, parse_tie_break(config.tie_break));
        const bool valid = validate_policy(chain, result.policy, goal);
        const std::string policy_file = serialize_policy(result.policy, chain.states);
        if (!out_path.empty()) {
            std::ofstream file(out_path);
            if (!file)
                throw Error("cannot write policy file '" + out_path + "'");
            file << policy_file;
        }
        if (config.output == "json") {
            json doc;
            doc["config"] = to_json(config);
            doc["model"] = model_summary_json(chain);
            doc["synthesis"] = to_json(result, chain);
            doc["validated"] = valid;
            out << doc.dump(2) << "\n";
        } else {
            // stdout stays a loadable policy file; context rides in comments
            out << "# " << to_text(config) << "\n";
            std::istringstream info(to_text(result, chain));
            std::string line;
            while (std::getline(info, line))
                out << "# " << line << "\n";
            out << "# validated: " << (valid ? "true" : "false") << "\n";
            out << policy_file;
        }
        return kExitOk;
    } catch (const UnstabilizableError& e) {
        if (config.output == "json") {
            json doc;
            doc["config"] = to_json(config);
            doc["model"] = model_summary_json(chain);
            json states = json::array();
            for (int s : e.unreachable_states)
                states.push_back(chain.states.label(s));
            doc["synthesis"] = nullptr;
            doc["unstabilizable"] = {{"states", states}, {"reason", e.what()}};
            out << doc.dump(2) << "\n";
        } else {
            out << "# " << to_text(config) << "\n";
            out << "not stabilizable: " << e.what() << "\n";
        }
        return config.strict ? kExitVerdict : kExitOk;
    }
}

int run_expected_time(RunConfig& config, std::ostream& out) {
    auto [spec, chain] = load(config);
    const auto goal = resolve_labels(config.goal_labels, chain.states);
    const auto policy = load_policy(config.policy_path, chain.states, chain.mode_count());
    const bool valid = validate_policy(chain, policy, goal);

    json doc;
    doc["config"] = to_json(config);
    doc["model"] = model_summary_json(chain);
    doc["policy"] = policy_json(policy, chain.states);
    doc["valid"] = valid;

    if (!valid) {
        if (config.output == "json") {
            doc["expected_times"] = nullptr;
            out << doc.dump(2) << "\n";
        } else {
            out << to_text(config) << "\n";
            out << "policy does not reach the goal from every state; expected times are "
                   "undefined\n";
        }
        return config.strict ? kExitVerdict : kExitOk;
    }

    const auto induced = induced_chain(chain, policy);
    const auto times = expected_absorption_time(induced, goal);
    if (config.output == "json") {
        doc["expected_times"] = expected_times_json(times, chain.states);
        out << doc.dump(2) << "\n";
    } else {
        out << to_text(config) << "\n";
        out << expected_times_text(times, chain.states);
    }
    return kExitOk;
}

int run_simulate(RunConfig& config, const std::string& dump_path, std::ostream& out) {
    auto [spec, chain] = load(config);
    const auto signal = parse_signal(config.signal, chain, config.seed);
    config.signal = to_string(signal); // echo the resolved signal

    SimConfig sim;
    sim.trials = config.trials;
    sim.horizon = config.horizon;
    sim.seed = config.seed;
    if (!config.goal_labels.empty())
        sim.goal = resolve_labels(config.goal_labels, chain.states);

    std::vector<int> inits;
    if (config.init == "all") {
        for (int i = 0; i < chain.state_count(); ++i)
            inits.push_back(i);
    } else {
        auto index = chain.states.index_of(config.init);
        if (!index)
            throw Error("unknown state label '" + config.init + "'");
        inits.push_back(*index);
    }

    if (!dump_path.empty()) {
        std::ofstream dump(dump_path);
        if (!dump)
            throw Error("cannot write trajectory dump '" + dump_path + "'");
        for (int init : inits) {
            for (long long t = 0; t < std::min<long long>(config.trials, 100); ++t) {
                const auto trajectory = run_trajectory(chain, signal, init, config.horizon,
                                                       config.seed,
                                                       static_cast<std::uint64_t>(t), sim.goal);
                dump << chain.states.label(init) << " trial " << t << ":";
                for (int s : trajectory.states)
                    dump << ' ' << chain.states.label(s);
                dump << '\n';
            }
        }
    }

    json per_init = json::array();
    std::ostringstream text;
    for (int init : inits) {
        const SimStats stats = estimate_absorption(chain, signal, init, sim);
        if (config.output == "json") {
            json entry;
            entry["init"] = chain.states.label(init);
            entry["stats"] = to_json(stats, chain.states);
            per_init.push_back(entry);
        } else {
            text << "init " << chain.states.label(init) << ": "
                 << to_text(stats, chain.states);
        }
    }

    if (config.output == "json") {
        json doc;
        doc["config"] = to_json(config);
        doc["model"] = model_summary_json(chain);
        doc["simulation"] = per_init;
        out << doc.dump(2) << "\n";
    } else {
        out << to_text(config) << "\n" << text.str();
    }
    return kExitOk;
}

int run_find_trap(RunConfig& config, std::ostream& out) {
    auto [spec, chain] = load(config);
    const auto star = absorbing_sets(chain).intersection_set;
    TrapSearchLimits limits{config.max_states};
    const auto trap = find_trap_policy(chain, star, limits);

    if (config.output == "json") {
        json doc;
        doc["config"] = to_json(config);
        doc["model"] = model_summary_json(chain);
        if (trap) {
            json stuck = json::array();
            for (int s : trap->stuck_states)
                stuck.push_back(chain.states.label(s));
            doc["trap"] = {{"policy", policy_json(trap->policy, chain.states)},
                           {"stuck_states", stuck}};
        } else {
            doc["trap"] = nullptr;
        }
        out << doc.dump(2) << "\n";
    } else {
        out << to_text(config) << "\n";
        if (trap) {
            out << "trap policy found; stranded states:";
            for (int s : trap->stuck_states)
                out << ' ' << chain.states.label(s);
            out << "\n" << serialize_policy(trap->policy, chain.states);
        } else {
            out << "no trap policy: every state-feedback switching policy reaches the "
                   "common absorbing set from every state\n";
        }
    }
    if (trap && config.strict)
        return kExitVerdict;
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"verification and synthesis for switched absorbing Markov chains"};
    app.require_subcommand(1);

    RunConfig config;
    std::string goal_csv;
    std::string export_dir;
    std::string out_path;
    std::string dump_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("model", config.model_path, "model file")->required();
        cmd->add_option("--format", config.model_format, "model file format: text|json")
            ->check(CLI::IsMember({"text", "json"}));
        cmd->add_option("--output", config.output, "report format: text|json")
            ->check(CLI::IsMember({"text", "json"}));
        cmd->add_option("--concretize", config.concretization,
                        "fill strategy for x entries: uniform|seeded:<n>");
        cmd->add_flag("--strict", config.strict,
                      "exit 1 on REFUTED / unstabilizable verdicts");
    };

    CLI::App* analyze_cmd = app.add_subcommand("analyze", "verdicts for one model");
    add_common(analyze_cmd);
    analyze_cmd->add_option("--goal", goal_csv, "goal states (comma separated labels)");
    analyze_cmd->add_option("--max-states", config.max_states, "trap search state limit");
    analyze_cmd->add_option("--export-graphs", export_dir,
                            "write edge-list and dot files into this directory");

    CLI::App* synth_cmd = app.add_subcommand("synthesize", "construct a switching policy");
    add_common(synth_cmd);
    synth_cmd->add_option("--goal", goal_csv, "goal states (comma separated labels)")
        ->required();
    synth_cmd->add_option("--tie-break", config.tie_break, "lowest|seeded:<n>");
    synth_cmd->add_option("--out", out_path, "also write the policy to this file");

    CLI::App* time_cmd = app.add_subcommand("expected-time", "expected steps to the goal");
    add_common(time_cmd);
    time_cmd->add_option("--policy", config.policy_path, "policy file")->required();
    time_cmd->add_option("--goal", goal_csv, "goal states (comma separated labels)")
        ->required();

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo absorption estimates");
    add_common(sim_cmd);
    sim_cmd->add_option("--signal", config.signal,
                        "policy:<file>|mode:<i>|random[:<seed>]|schedule:<file>")
        ->required();
    sim_cmd->add_option("--init", config.init, "initial state label, or 'all'")->required();
    sim_cmd->add_option("--trials", config.trials, "number of trials");
    sim_cmd->add_option("--horizon", config.horizon, "steps per trial");
    sim_cmd->add_option("--seed", config.seed, "master seed");
    sim_cmd->add_option("--goal", goal_csv,
                        "count absorption on these states instead of the common absorbing set");
    sim_cmd->add_option("--dump", dump_path, "write sampled trajectories (first 100 per init)");

    CLI::App* trap_cmd = app.add_subcommand("find-trap", "search for a trap policy");
    add_common(trap_cmd);
    trap_cmd->add_option("--max-states", config.max_states, "enumeration state limit");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    config.goal_labels = split_commas(goal_csv);

    try {
        if (analyze_cmd->parsed()) {
            config.subcommand = "analyze";
            return run_analyze(config, export_dir, out);
        }
        if (synth_cmd->parsed()) {
            config.subcommand = "synthesize";
            return run_synthesize(config, out_path, out);
        }
        if (time_cmd->parsed()) {
            config.subcommand = "expected-time";
            return run_expected_time(config, out);
        }
        if (sim_cmd->parsed()) {
            config.subcommand = "simulate";
            return run_simulate(config, dump_path, out);
        }
        config.subcommand = "find-trap";
        return run_find_trap(config, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

} // namespace switchmc::cli
