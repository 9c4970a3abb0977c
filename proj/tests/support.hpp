#pragma once

#include "switchmc/model.hpp"
#include "switchmc/policy.hpp"

#include <string>
#include <vector>

namespace switchmc::test {

inline std::string models_dir() {
    return SWITCHMC_MODELS_DIR;
}

inline std::string fixture_path(const std::string& name) {
    return models_dir() + "/" + name;
}

inline ModelSpec load_fixture(const std::string& name) {
    return load_model(fixture_path(name));
}

inline SwitchedChain load_uniform(const std::string& name) {
    return concretize(load_fixture(name));
}

inline std::vector<int> states_of(const SwitchedChain& chain,
                                  const std::vector<std::string>& labels) {
    std::vector<int> out;
    for (const auto& label : labels)
        out.push_back(*chain.states.index_of(label));
    return out;
}

// 1-based mode assignments, as printed in reports and policy files
inline SwitchingPolicy policy_1based(const std::vector<int>& modes) {
    SwitchingPolicy policy;
    for (int m : modes)
        policy.mode_for_state.push_back(m - 1);
    return policy;
}

} // namespace switchmc::test
