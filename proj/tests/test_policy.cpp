#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "switchmc/analysis.hpp"
#include "switchmc/errors.hpp"
#include "switchmc/policy.hpp"
#include "switchmc/simulate.hpp"

#include "generators.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace switchmc;
using namespace switchmc::test;

namespace {

const std::vector<int> kGoalA2{1};
const std::vector<int> kGoalA4{3};

SwitchedChain ex1_single_mode2() {
    const ModelSpec full = load_fixture("ex1.model");
    return make_chain(full.states, {concretize(full.modes[1])});
}

} // namespace

TEST_CASE("closer set lists exactly the strictly closer states") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    // d_union to {a2} is (1,0,1,2); below a4's distance of 2 sit a1, a2, a3
    CHECK(closer_set(ex1, kGoalA2, 3) == std::vector<int>{0, 1, 2});
    CHECK(closer_set(ex1, kGoalA2, 0) == std::vector<int>{1});
    CHECK(closer_set(ex1, kGoalA2, 1).empty()); // goal state: nothing is closer
}

TEST_CASE("synthesis reproduces the published policy for the first example") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    const SynthesisResult result = synthesize_policy(ex1, kGoalA2);
    CHECK(result.policy == policy_1based({1, 1, 1, 2}));
    CHECK(validate_policy(ex1, result.policy, kGoalA2));

    // each transient step targets a strictly closer state
    for (const PolicyStep& step : result.certificate) {
        if (step.target < 0)
            continue;
        CHECK(result.distances[step.target] < result.distances[step.state]);
        CHECK(ex1.mode(step.mode).at(step.state, step.target) > 0.0);
        CHECK(step.target_distance == result.distances[step.target]);
    }
}

TEST_CASE("identical modes collapse to the lowest index under tie-breaking") {
    const ModelSpec spec = load_fixture("ex5.model");
    const Mode p1 = concretize(spec.modes[0]);
    const SwitchedChain twins = make_chain(spec.states, {p1, p1});
    const SynthesisResult result = synthesize_policy(twins, kGoalA4);
    CHECK(result.policy == policy_1based({1, 1, 1, 1}));
}

TEST_CASE("seeded tie-breaking stays within the feasible choice sets") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    std::mt19937_64 seeds(5);
    for (int round = 0; round < 20; ++round) {
        const SynthesisResult result =
            synthesize_policy(ex1, kGoalA2, TieBreakSeeded{seeds()});
        CHECK(validate_policy(ex1, result.policy, kGoalA2));
    }
    const auto a = synthesize_policy(ex1, kGoalA2, TieBreakSeeded{7});
    const auto b = synthesize_policy(ex1, kGoalA2, TieBreakSeeded{7});
    CHECK(a.policy == b.policy);
}

TEST_CASE("synthesis rejects goals that are unreachable on the union graph") {
    const SwitchedChain only_mode2 = ex1_single_mode2();
    try {
        synthesize_policy(only_mode2, kGoalA2);
        FAIL("expected an unstabilizable error");
    } catch (const UnstabilizableError& e) {
        CHECK(e.unreachable_states == std::vector<int>{2, 3});
        CHECK(std::string(e.what()).find("a3") != std::string::npos);
    }
    CHECK_THROWS_AS(synthesize_policy(only_mode2, std::vector<int>{}), Error);
}

TEST_CASE("induced chain copies rows from the assigned modes") {
    const SwitchedChain ex2 = load_uniform("ex2.model");
    const SwitchingPolicy trap = policy_1based({1, 1, 2, 2});
    const InducedChain q = induced_chain(ex2, trap);
    for (int j = 0; j < 4; ++j) {
        CHECK(q.mode.at(0, j) == ex2.mode(0).at(0, j));
        CHECK(q.mode.at(1, j) == ex2.mode(0).at(1, j));
        CHECK(q.mode.at(2, j) == ex2.mode(1).at(2, j));
        CHECK(q.mode.at(3, j) == ex2.mode(1).at(3, j));
    }

    // single mode: any policy reproduces it
    const SwitchedChain single = ex1_single_mode2();
    const InducedChain same = induced_chain(single, policy_1based({1, 1, 1, 1}));
    CHECK(same.mode.at(3, 2) == single.mode(0).at(3, 2));

    const SwitchedChain ex1 = load_uniform("ex1.model");
    const InducedChain synth = induced_chain(ex1, policy_1based({1, 1, 1, 2}));
    CHECK(synth.mode.is_absorbing_state(1)); // a2 row stays absorbing
}

TEST_CASE("policy validation checks absorption and reachability") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    CHECK(validate_policy(ex1, policy_1based({1, 1, 1, 2}), kGoalA2));

    const SwitchedChain ex2 = load_uniform("ex2.model");
    CHECK(!validate_policy(ex2, policy_1based({1, 1, 2, 2}), kGoalA4)); // the trap

    // goal state assigned a mode where it is not absorbing
    const SwitchedChain ex1b = load_uniform("ex1.model");
    CHECK(!validate_policy(ex1b, policy_1based({1, 1, 1, 1}), std::vector<int>{3}));

    CHECK_THROWS_AS(validate_policy(ex1, policy_1based({1, 1, 1}), kGoalA2), Error);
    CHECK_THROWS_AS(validate_policy(ex1, policy_1based({1, 1, 1, 3}), kGoalA2), Error);
}

TEST_CASE("expected absorption times match the hand-solved chain") {
    const SwitchedChain ex2 = load_uniform("ex2.model");
    const InducedChain q = induced_chain(ex2, policy_1based({1, 1, 1, 1}));
    const auto times = expected_absorption_time(q, kGoalA4);

    // first-step analysis on the uniform concretization gives (6, 4, 2, 0)
    CHECK(times[0] == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(times[1] == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(times[2] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(times[3] == 0.0);

    const auto oracle = value_iteration_times(q.mode, kGoalA4);
    for (int i = 0; i < 4; ++i)
        CHECK(times[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
}

TEST_CASE("expected absorption times on the synthesized first-example policy") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    const InducedChain q = induced_chain(ex1, policy_1based({1, 1, 1, 2}));
    const auto times = expected_absorption_time(q, kGoalA2);
    const auto oracle = value_iteration_times(q.mode, kGoalA2);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(times[i] - oracle[i]) <= 1e-8);
    // frozen from the iteration oracle: a1 3, a3 4, a4 6
    CHECK(times[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(times[2] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(times[3] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("expected absorption time flags policies that strand states") {
    const SwitchedChain ex2 = load_uniform("ex2.model");
    const InducedChain trap = induced_chain(ex2, policy_1based({1, 1, 2, 2}));
    CHECK_THROWS_WITH_AS(expected_absorption_time(trap, kGoalA4),
                         doctest::Contains("no path"), Error);
}

TEST_CASE("absorption probabilities for validated policies concentrate on the goal") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    const InducedChain q = induced_chain(ex1, policy_1based({1, 1, 1, 2}));
    const auto probs = absorption_probabilities(q, kGoalA2);
    for (int i = 0; i < 4; ++i)
        CHECK(probs.at_state(i, 1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("absorption probabilities split per the propagation oracle") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    const InducedChain q = induced_chain(ex1, policy_1based({1, 1, 1, 1}));
    const std::vector<int> targets{1, 3}; // mode 1 absorbs at both a2 and a4
    const auto probs = absorption_probabilities(q, targets);

    for (int start : {0, 2}) {
        const auto oracle = propagate_absorption(q.mode, start, targets, 10'000);
        CHECK(probs.at_state(start, 1) == doctest::Approx(oracle[0]).epsilon(1e-9));
        CHECK(probs.at_state(start, 3) == doctest::Approx(oracle[1]).epsilon(1e-9));
    }
    // the uniform concretization sends a1 to a2 with probability 3/4
    CHECK(probs.at_state(0, 1) == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(probs.at_state(0, 3) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(probs.at_state(2, 1) == doctest::Approx(0.5).epsilon(1e-10));

    for (int i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < targets.size(); ++c)
            sum += probs.at(i, static_cast<int>(c));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("absorption probabilities reject non-absorbing targets") {
    const SwitchedChain ex2 = load_uniform("ex2.model");
    const InducedChain trap = induced_chain(ex2, policy_1based({1, 1, 2, 2}));
    CHECK_THROWS_AS(absorption_probabilities(trap, kGoalA4), Error);
    const InducedChain fine = induced_chain(ex2, policy_1based({1, 1, 1, 1}));
    CHECK_THROWS_WITH_AS(absorption_probabilities(fine, std::vector<int>{0}),
                         doctest::Contains("not absorbing"), Error);
}

TEST_CASE("policy files round-trip and reject malformed content") {
    const SwitchedChain ex1 = load_uniform("ex1.model");
    const SwitchingPolicy policy = policy_1based({1, 1, 1, 2});
    const std::string text = serialize_policy(policy, ex1.states);
    CHECK(text == "a1 1\na2 1\na3 1\na4 2\n");
    CHECK(parse_policy(text, ex1.states, 2) == policy);
    CHECK(parse_policy("# choice\na4 2\na3 1\na2 1\na1 1\n", ex1.states, 2) == policy);

    CHECK_THROWS_WITH_AS(parse_policy("a1 1\n", ex1.states, 2),
                         doctest::Contains("does not assign"), Error);
    CHECK_THROWS_WITH_AS(parse_policy("a1 1\na2 1\na3 1\na9 2\n", ex1.states, 2),
                         doctest::Contains("unknown state label"), ParseError);
    CHECK_THROWS_WITH_AS(parse_policy("a1 3\na2 1\na3 1\na4 2\n", ex1.states, 2),
                         doctest::Contains("outside 1..2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_policy(text + "a1 2\n", ex1.states, 2),
                         doctest::Contains("assigned twice"), ParseError);
}

TEST_CASE("synthesized policies validate on random stabilizable instances") {
    std::mt19937_64 rng(60902);
    int synthesized = 0;
    for (int round = 0; round < 300; ++round) {
        ChainOptions options;
        options.equal_absorbing = round % 2 == 0;
        const SwitchedChain chain = random_chain(rng, options);
        const auto sets = absorbing_sets(chain);
        if (sets.union_set.empty())
            continue;
        const std::vector<int> goal{sets.union_set.front()};
        const auto [ok, dist] = check_stabilizable(chain, goal);
        if (!ok) {
            CHECK_THROWS_AS(synthesize_policy(chain, goal), UnstabilizableError);
            continue;
        }
        ++synthesized;
        const SynthesisResult result = synthesize_policy(chain, goal);
        CHECK(validate_policy(chain, result.policy, goal));
        for (const PolicyStep& step : result.certificate)
            if (step.target >= 0)
                CHECK(result.distances[step.target] < result.distances[step.state]);
    }
    CHECK(synthesized > 50);
}

TEST_CASE("expected times dominate the union-graph distance and match the oracle") {
    std::mt19937_64 rng(1311);
    int checked = 0;
    for (int round = 0; round < 200 && checked < 100; ++round) {
        const SwitchedChain chain = random_chain(rng, {});
        const auto sets = absorbing_sets(chain);
        if (sets.union_set.empty())
            continue;
        const std::vector<int> goal{sets.union_set.front()};
        auto [ok, dist] = check_stabilizable(chain, goal);
        if (!ok)
            continue;
        ++checked;
        const SynthesisResult result = synthesize_policy(chain, goal);
        const InducedChain q = induced_chain(chain, result.policy);
        const auto times = expected_absorption_time(q, goal);
        const auto oracle = value_iteration_times(q.mode, goal);
        for (int i = 0; i < chain.state_count(); ++i) {
            CHECK(std::abs(times[i] - oracle[i]) <= 1e-8);
            CHECK(times[i] >= static_cast<double>(dist[i].hops()) - 1e-9);
        }

        const auto probs = absorption_probabilities(q, goal);
        for (int i = 0; i < chain.state_count(); ++i)
            CHECK(probs.at_state(i, goal.front()) == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(checked == 100);
}

TEST_CASE("monte carlo hitting times agree with the linear solve") {
    const SwitchedChain ex2 = load_uniform("ex2.model");
    const SwitchingPolicy stay = policy_1based({1, 1, 1, 1});
    const InducedChain q = induced_chain(ex2, stay);
    const auto times = expected_absorption_time(q, kGoalA4);

    SimConfig config;
    config.trials = 20'000;
    config.horizon = 2'000;
    config.seed = 99;
    const SimStats stats = estimate_absorption(ex2, StatePolicy{stay}, 0, config);
    CHECK(stats.absorbed_count == config.trials);
    CHECK(std::abs(stats.mean_hitting_time - times[0]) <=
          3.0 * stats.hitting_time_std_error);
}
