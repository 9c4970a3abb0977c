#pragma once

#include "switchmc/analysis.hpp"
#include "switchmc/model.hpp"
#include "switchmc/policy.hpp"
#include "switchmc/simulate.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace switchmc {

/// Everything a run depends on; embedded in every report so any output can
/// be reproduced from the report alone.
struct RunConfig {
    std::string subcommand;
    std::string model_path;
    std::string model_format = "text";
    std::string output = "text"; // text | json
    std::vector<std::string> goal_labels;
    bool goal_defaulted = false;
    std::string policy_path;
    std::string signal;
    std::string init;
    long long trials = 10'000;
    int horizon = 1'000;
    std::uint64_t seed = 0;
    std::string concretization = "uniform";
    std::string tie_break = "lowest";
    int max_states = 12;
    bool strict = false;
};

nlohmann::json to_json(const RunConfig& config);
std::string to_text(const RunConfig& config);

nlohmann::json to_json(const Certificate& cert, const StateSpace& states);
std::string to_text(const Certificate& cert, const StateSpace& states);

nlohmann::json model_summary_json(const SwitchedChain& chain);
std::string model_summary_text(const SwitchedChain& chain);

nlohmann::json graphs_json(const SwitchedChain& chain);
std::string graphs_text(const SwitchedChain& chain);

nlohmann::json to_json(const AnalysisReport& report, const SwitchedChain& chain);
std::string to_text(const AnalysisReport& report, const SwitchedChain& chain);

nlohmann::json to_json(const SynthesisResult& result, const SwitchedChain& chain);
std::string to_text(const SynthesisResult& result, const SwitchedChain& chain);

nlohmann::json to_json(const SimStats& stats, const StateSpace& states);
std::string to_text(const SimStats& stats, const StateSpace& states);

nlohmann::json expected_times_json(const std::vector<double>& times, const StateSpace& states);
std::string expected_times_text(const std::vector<double>& times, const StateSpace& states);

nlohmann::json policy_json(const SwitchingPolicy& policy, const StateSpace& states);

} // namespace switchmc
