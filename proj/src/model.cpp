#include "switchmc/model.hpp"

#include "switchmc/errors.hpp"
#include "switchmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

namespace switchmc {

namespace {

// Row sums of parsed exact entries carry decimal round-off; rows filled by
// concretize are held to machine-level stochasticity.
constexpr double kParsedRowSumTol = 1e-9;
constexpr double kFilledRowSumTol = 1e-12;

std::vector<int> sorted_union(const std::vector<std::vector<int>>& sets) {
    std::set<int> acc;
    for (const auto& s : sets)
        acc.insert(s.begin(), s.end());
    return {acc.begin(), acc.end()};
}

std::vector<int> sorted_intersection(const std::vector<std::vector<int>>& sets) {
    if (sets.empty())
        return {};
    std::vector<int> acc = sets.front();
    for (std::size_t i = 1; i < sets.size(); ++i) {
        std::vector<int> next;
        std::ranges::set_intersection(acc, sets[i], std::back_inserter(next));
        acc = std::move(next);
    }
    return acc;
}

} // namespace

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
        throw Error("state space is empty");
    std::unordered_set<std::string_view> seen;
    for (const auto& label : labels_) {
        if (label.empty())
            throw Error("empty state label");
        if (!seen.insert(label).second)
            throw Error("duplicate state label '" + label + "'");
    }
}

std::optional<int> StateSpace::index_of(std::string_view label) const {
    for (int i = 0; i < size(); ++i)
        if (labels_[static_cast<std::size_t>(i)] == label)
            return i;
    return std::nullopt;
}

ModeSpec::ModeSpec(int n, std::vector<SpecCell> cells, std::string name)
    : n_(n), name_(std::move(name)), cells_(std::move(cells)) {
    if (n_ < 1)
        throw Error("mode must have at least one state");
    if (cells_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_))
        throw Error("mode '" + name_ + "': cell count does not match dimension");
    for (int i = 0; i < n_; ++i) {
        double exact_sum = 0.0;
        int wildcards = 0;
        for (int j = 0; j < n_; ++j) {
            const SpecCell& c = at(i, j);
            if (c.wildcard) {
                ++wildcards;
            } else {
                if (c.value < 0.0 || c.value > 1.0)
                    throw Error("mode '" + name_ + "' row " + std::to_string(i + 1) +
                                ": entry outside [0,1]");
                exact_sum += c.value;
            }
        }
        if (wildcards == 0) {
            if (std::abs(exact_sum - 1.0) > kParsedRowSumTol)
                throw Error("mode '" + name_ + "' row " + std::to_string(i + 1) +
                            ": exact entries sum to " + std::to_string(exact_sum) +
                            ", expected 1");
        } else if (exact_sum >= 1.0) {
            // every wildcard must receive strictly positive mass
            throw Error("mode '" + name_ + "' row " + std::to_string(i + 1) +
                        ": exact entries leave no mass for 'x' entries");
        }
    }
    for (int j = 0; j < n_; ++j) {
        const SpecCell& d = at(j, j);
        if (!d.wildcard && d.value == 1.0)
            absorbing_.push_back(j);
    }
}

Mode::Mode(int n, std::vector<double> row_major, std::string name)
    : n_(n), name_(std::move(name)), p_(std::move(row_major)) {
    if (n_ < 1)
        throw Error("mode must have at least one state");
    if (p_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_))
        throw Error("mode '" + name_ + "': entry count does not match dimension");
    for (int j = 0; j < n_; ++j)
        if (at(j, j) == 1.0)
            absorbing_.push_back(j);
    validate();
}

Mode::Mode(int n, std::vector<double> row_major, std::vector<int> absorbing, std::string name)
    : n_(n), name_(std::move(name)), p_(std::move(row_major)), absorbing_(std::move(absorbing)) {
    if (n_ < 1)
        throw Error("mode must have at least one state");
    if (p_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_))
        throw Error("mode '" + name_ + "': entry count does not match dimension");
    std::ranges::sort(absorbing_);
    validate();
}

void Mode::validate() const {
    for (int i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n_; ++j) {
            double p = at(i, j);
            if (p < 0.0 || p > 1.0)
                throw Error("mode '" + name_ + "' row " + std::to_string(i + 1) +
                            ": probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kParsedRowSumTol)
            throw Error("mode '" + name_ + "' row " + std::to_string(i + 1) +
                        ": probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
    for (int j : absorbing_) {
        if (j < 0 || j >= n_)
            throw Error("absorbing state index out of range");
        for (int l = 0; l < n_; ++l)
            if (at(j, l) != (l == j ? 1.0 : 0.0))
                throw Error("mode '" + name_ + "': absorbing state " + std::to_string(j + 1) +
                            " does not have a unit row");
    }
}

bool Mode::is_absorbing_state(int i) const {
    return std::ranges::binary_search(absorbing_, i);
}

SwitchedChain make_chain(StateSpace states, std::vector<Mode> modes) {
    if (modes.empty())
        throw Error("chain must have at least one mode");
    for (const auto& m : modes)
        if (m.size() != states.size())
            throw Error("mode '" + m.name() + "' dimension does not match state count");
    return SwitchedChain{std::move(states), std::move(modes)};
}

std::string to_string(const FillStrategy& strategy) {
    if (std::holds_alternative<UniformFill>(strategy))
        return "uniform";
    return "seeded:" + std::to_string(std::get<SeededRandomFill>(strategy).seed);
}

FillStrategy parse_fill_strategy(std::string_view text) {
    if (text == "uniform")
        return UniformFill{};
    constexpr std::string_view prefix = "seeded:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string digits(text.substr(prefix.size()));
        try {
            std::size_t used = 0;
            std::uint64_t seed = std::stoull(digits, &used);
            if (used == digits.size())
                return SeededRandomFill{seed};
        } catch (const std::exception&) {
        }
    }
    throw Error("unknown concretization strategy '" + std::string(text) +
                "' (expected 'uniform' or 'seeded:<n>')");
}

namespace {

Mode concretize_with_seed(const ModeSpec& spec, const FillStrategy& strategy,
                          std::uint64_t stream) {
    const int n = spec.size();
    std::vector<double> p(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);

    std::mt19937_64 rng(derive_seed(std::holds_alternative<SeededRandomFill>(strategy)
                                        ? std::get<SeededRandomFill>(strategy).seed
                                        : 0,
                                    stream));

    for (int i = 0; i < n; ++i) {
        double exact_sum = 0.0;
        std::vector<int> wild;
        for (int j = 0; j < n; ++j) {
            const SpecCell& c = spec.at(i, j);
            if (c.wildcard)
                wild.push_back(j);
            else {
                p[static_cast<std::size_t>(i * n + j)] = c.value;
                exact_sum += c.value;
            }
        }
        if (wild.empty())
            continue;
        const double residual = 1.0 - exact_sum;
        if (residual <= 0.0)
            throw Error("mode '" + spec.name() + "' row " + std::to_string(i + 1) +
                        ": no residual mass left for 'x' entries");
        if (std::holds_alternative<UniformFill>(strategy)) {
            const double share = residual / static_cast<double>(wild.size());
            for (int j : wild)
                p[static_cast<std::size_t>(i * n + j)] = share;
        } else {
            // positive weights bounded away from zero, normalized to the residual
            std::vector<double> w(wild.size());
            double total = 0.0;
            for (auto& x : w) {
                x = 0.05 + canonical_double(rng());
                total += x;
            }
            for (std::size_t l = 0; l < wild.size(); ++l)
                p[static_cast<std::size_t>(i * n + wild[l])] = residual * w[l] / total;
        }
        double check = 0.0;
        for (int j = 0; j < n; ++j)
            check += p[static_cast<std::size_t>(i * n + j)];
        if (std::abs(check - 1.0) > kFilledRowSumTol)
            throw Error("mode '" + spec.name() + "' row " + std::to_string(i + 1) +
                        ": filled row failed the stochasticity check");
    }
    return Mode(n, std::move(p), spec.absorbing(), spec.name());
}

} // namespace

Mode concretize(const ModeSpec& spec, const FillStrategy& strategy) {
    return concretize_with_seed(spec, strategy, 0);
}

SwitchedChain concretize(const ModelSpec& model, const FillStrategy& strategy) {
    std::vector<Mode> modes;
    modes.reserve(model.modes.size());
    for (std::size_t i = 0; i < model.modes.size(); ++i)
        modes.push_back(concretize_with_seed(model.modes[i], strategy, i));
    return make_chain(model.states, std::move(modes));
}

namespace {

template <typename ModeLike>
AbsorbingSets absorbing_sets_impl(const std::vector<ModeLike>& modes) {
    AbsorbingSets out;
    out.per_mode.reserve(modes.size());
    for (const auto& m : modes)
        out.per_mode.push_back(m.absorbing());
    out.union_set = sorted_union(out.per_mode);
    out.intersection_set = sorted_intersection(out.per_mode);
    return out;
}

} // namespace

AbsorbingSets absorbing_sets(const ModelSpec& model) {
    return absorbing_sets_impl(model.modes);
}

AbsorbingSets absorbing_sets(const SwitchedChain& chain) {
    return absorbing_sets_impl(chain.modes);
}

void validate_goal_states(const SwitchedChain& chain, std::span<const int> goal) {
    if (goal.empty())
        throw Error("goal set is empty");
    const auto sets = absorbing_sets(chain);
    for (int g : goal) {
        if (g < 0 || g >= chain.state_count())
            throw Error("goal state index out of range");
        if (!std::ranges::binary_search(sets.union_set, g))
            throw Error("goal state '" + chain.states.label(g) +
                        "' is not absorbing in any mode");
    }
}

DiGraph simplified_graph(const Mode& mode) {
    DiGraph g(mode.size());
    for (int i = 0; i < mode.size(); ++i)
        for (int j = 0; j < mode.size(); ++j)
            if (i != j && mode.at(i, j) > 0.0)
                g.add_edge(i, j);
    return g;
}

DiGraph simplified_graph(const ModeSpec& mode) {
    DiGraph g(mode.size());
    for (int i = 0; i < mode.size(); ++i)
        for (int j = 0; j < mode.size(); ++j)
            if (i != j && mode.at(i, j).feasible())
                g.add_edge(i, j);
    return g;
}

namespace {

template <typename ModeLike>
bool is_absorbing_mode_impl(const ModeLike& mode) {
    const auto dist = distance_table(simplified_graph(mode), mode.absorbing());
    return std::ranges::all_of(dist, [](Distance d) { return d.is_finite(); });
}

} // namespace

bool is_absorbing_mode(const Mode& mode) {
    return is_absorbing_mode_impl(mode);
}

bool is_absorbing_mode(const ModeSpec& mode) {
    return is_absorbing_mode_impl(mode);
}

std::vector<DiGraph> mode_graphs(const SwitchedChain& chain) {
    std::vector<DiGraph> graphs;
    graphs.reserve(chain.modes.size());
    for (const auto& m : chain.modes)
        graphs.push_back(simplified_graph(m));
    return graphs;
}

DiGraph union_graph(const SwitchedChain& chain) {
    const auto graphs = mode_graphs(chain);
    return union_graph(std::span<const DiGraph>(graphs));
}

DiGraph intersection_graph(const SwitchedChain& chain) {
    const auto graphs = mode_graphs(chain);
    return intersection_graph(std::span<const DiGraph>(graphs));
}

} // namespace switchmc
