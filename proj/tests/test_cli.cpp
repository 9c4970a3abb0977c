#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "switchmc/cli.hpp"
#include "switchmc/model.hpp"
#include "switchmc/policy.hpp"

#include "support.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace switchmc;
using namespace switchmc::test;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    RunResult result;
    result.code = cli::run(args, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream file(path);
    file << content;
    return path;
}

} // namespace

TEST_CASE("analyze prints the guaranteed verdict with its condition") {
    const auto result = run_cli({"analyze", fixture_path("ex5.model")});
    CHECK(result.code == 0);
    CHECK(result.out.find("GUARANTEED") != std::string::npos);
    CHECK(result.out.find("condition3") != std::string::npos);
}

TEST_CASE("unknown state labels are a distinct input error") {
    const auto result = run_cli({"analyze", fixture_path("ex1.model"), "--goal", "a5"});
    CHECK(result.code == 2);
    CHECK(result.err.find("unknown state label 'a5'") != std::string::npos);
    CHECK(result.out.empty());
}

TEST_CASE("missing files and malformed flags get their own diagnostics") {
    const auto missing = run_cli({"analyze", "/nope/missing.model"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("cannot open model file") != std::string::npos);

    const auto badflag = run_cli({"analyze", fixture_path("ex1.model"), "--frobnicate"});
    CHECK(badflag.code == 2);
    CHECK(badflag.err.find("error:") != std::string::npos);

    const auto badsignal = run_cli({"simulate", fixture_path("ex1.model"), "--signal",
                                    "sorcery", "--init", "a1"});
    CHECK(badsignal.code == 2);
    CHECK(badsignal.err.find("malformed signal") != std::string::npos);

    const auto nocmd = run_cli({});
    CHECK(nocmd.code == 2);
}

TEST_CASE("strict mode turns refuted verdicts into exit code one") {
    CHECK(run_cli({"analyze", fixture_path("ex2.model")}).code == 0);
    CHECK(run_cli({"analyze", fixture_path("ex2.model"), "--strict"}).code == 1);
    CHECK(run_cli({"analyze", fixture_path("ex5.model"), "--strict"}).code == 0);
}

TEST_CASE("synthesize emits a loadable policy file on stdout") {
    const auto result = run_cli({"synthesize", fixture_path("ex1.model"), "--goal", "a2"});
    CHECK(result.code == 0);
    const SwitchedChain ex1 = load_uniform("ex1.model");
    const SwitchingPolicy policy = parse_policy(result.out, ex1.states, 2);
    CHECK(policy == policy_1based({1, 1, 1, 2}));
    CHECK(result.out.find("# validated: true") != std::string::npos);
}

TEST_CASE("synthesize reports unstabilizable goals without inventing output") {
    const auto single = temp_file("switchmc_mode2.model", "states: a1 a2 a3 a4\n"
                                                          "mode P2:\n0 x x 0\n0 1 0 0\n"
                                                          "0 0 0 1\n0 0 x x\n");
    const auto result = run_cli({"synthesize", single.string(), "--goal", "a2"});
    CHECK(result.code == 0);
    CHECK(result.out.find("not stabilizable") != std::string::npos);
    CHECK(result.out.find("a3") != std::string::npos);
    const auto strict =
        run_cli({"synthesize", single.string(), "--goal", "a2", "--strict"});
    CHECK(strict.code == 1);
}

TEST_CASE("expected-time reproduces the closed-form values") {
    const auto policy = temp_file("switchmc_stay.policy", "a1 1\na2 1\na3 1\na4 1\n");
    const auto result = run_cli({"expected-time", fixture_path("ex2.model"), "--policy",
                                 policy.string(), "--goal", "a4", "--output", "json"});
    CHECK(result.code == 0);
    const json doc = json::parse(result.out);
    CHECK(doc.at("valid") == true);
    const auto& times = doc.at("expected_times");
    CHECK(times[0].at("steps").get<double>() == doctest::Approx(6.0));
    CHECK(times[1].at("steps").get<double>() == doctest::Approx(4.0));
    CHECK(times[2].at("steps").get<double>() == doctest::Approx(2.0));
    CHECK(times[3].at("steps").get<double>() == doctest::Approx(0.0));
}

TEST_CASE("expected-time flags invalid policies instead of solving") {
    const auto trap = temp_file("switchmc_trap.policy", "a1 1\na2 1\na3 2\na4 2\n");
    const auto result = run_cli({"expected-time", fixture_path("ex2.model"), "--policy",
                                 trap.string(), "--goal", "a4"});
    CHECK(result.code == 0);
    CHECK(result.out.find("does not reach the goal") != std::string::npos);
    CHECK(run_cli({"expected-time", fixture_path("ex2.model"), "--policy", trap.string(),
                   "--goal", "a4", "--strict"})
              .code == 1);
}

TEST_CASE("simulate under the trap policy records zero absorptions") {
    const auto trap = temp_file("switchmc_trap2.policy", "a1 1\na2 1\na3 2\na4 2\n");
    const auto result = run_cli({"simulate", fixture_path("ex2.model"), "--signal",
                                 "policy:" + trap.string(), "--init", "a1", "--trials", "500",
                                 "--horizon", "500", "--seed", "5", "--output", "json"});
    CHECK(result.code == 0);
    const json doc = json::parse(result.out);
    const auto& stats = doc.at("simulation")[0].at("stats");
    CHECK(stats.at("absorbed_count") == 0);
    CHECK(stats.at("non_absorbed_fraction") == 1.0);
}

TEST_CASE("simulate accepts schedules and init all") {
    const auto schedule = temp_file("switchmc.schedule", "1\n2\n");
    const auto result = run_cli({"simulate", fixture_path("ex2.model"), "--signal",
                                 "schedule:" + schedule.string(), "--init", "all", "--trials",
                                 "200", "--horizon", "400", "--seed", "9", "--output", "json"});
    CHECK(result.code == 0);
    const json doc = json::parse(result.out);
    CHECK(doc.at("simulation").size() == 4);
    // echoing the resolved signal keeps reports self-describing
    CHECK(doc.at("config").at("signal") == "schedule:1,2");
}

TEST_CASE("simulate can dump trajectories for debugging") {
    const auto dump = std::filesystem::temp_directory_path() / "switchmc_dump.txt";
    std::filesystem::remove(dump);
    const auto result = run_cli({"simulate", fixture_path("ex1.model"), "--signal", "mode:1",
                                 "--init", "a1", "--trials", "5", "--horizon", "50", "--seed",
                                 "2", "--dump", dump.string()});
    CHECK(result.code == 0);
    std::ifstream in(dump);
    REQUIRE(in.good());
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("a1 trial 0:", 0) == 0);
}

TEST_CASE("find-trap emits the counterexample policy or a clean negative") {
    const auto found = run_cli({"find-trap", fixture_path("ex2.model")});
    CHECK(found.code == 0);
    CHECK(found.out.find("a1 1") != std::string::npos);
    CHECK(found.out.find("a3 2") != std::string::npos);
    CHECK(found.out.find("a4 2") != std::string::npos);
    CHECK(run_cli({"find-trap", fixture_path("ex2.model"), "--strict"}).code == 1);

    const auto none = run_cli({"find-trap", fixture_path("ex4.model")});
    CHECK(none.code == 0);
    CHECK(none.out.find("no trap policy") != std::string::npos);

    const auto limited =
        run_cli({"find-trap", fixture_path("ex2.model"), "--max-states", "2"});
    CHECK(limited.code == 2);
    CHECK(limited.err.find("limit exceeded") != std::string::npos);
}

TEST_CASE("json and text reports carry the same verdicts") {
    const auto text = run_cli({"analyze", fixture_path("ex3.model")});
    const auto machine =
        run_cli({"analyze", fixture_path("ex3.model"), "--output", "json"});
    CHECK(text.code == 0);
    CHECK(machine.code == 0);

    const json doc = json::parse(machine.out);
    const auto& analysis = doc.at("analysis");
    CHECK(analysis.at("arbitrary_switching").at("verdict") == "GUARANTEED");
    CHECK(analysis.at("arbitrary_switching").at("via") == "condition1");
    CHECK(analysis.at("conditions").at("condition1").at("holds") == true);
    CHECK(analysis.at("conditions").at("condition2").at("holds") == false);
    CHECK(analysis.at("conditions").at("condition3").at("holds") == false);

    CHECK(text.out.find("GUARANTEED") != std::string::npos);
    CHECK(text.out.find("condition1") != std::string::npos);
    CHECK(text.out.find("holds") != std::string::npos);

    // the config echo makes the run reproducible from the report alone
    CHECK(doc.at("config").at("model") == fixture_path("ex3.model"));
    CHECK(doc.at("config").at("concretization") == "uniform");
    CHECK(text.out.find("concretization=uniform") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical reports") {
    const std::vector<std::string> simulate_args{
        "simulate", fixture_path("ex2.model"), "--signal", "random", "--init", "a1",
        "--trials", "4000",  "--horizon", "200", "--seed", "123", "--output", "json"};
    CHECK(run_cli(simulate_args).out == run_cli(simulate_args).out);

    const std::vector<std::string> trap_args{"find-trap", fixture_path("ex2.model"),
                                             "--output", "json"};
    CHECK(run_cli(trap_args).out == run_cli(trap_args).out);
}

TEST_CASE("json models load through --format") {
    const ModelSpec model = load_fixture("ex1.model");
    const auto path = temp_file("switchmc_ex1.json", serialize_model_json(model));
    const auto from_json = run_cli({"analyze", path.string(), "--format", "json",
                                    "--output", "json"});
    CHECK(from_json.code == 0);
    const auto from_text = run_cli({"analyze", fixture_path("ex1.model"), "--output", "json"});
    const json a = json::parse(from_json.out);
    const json b = json::parse(from_text.out);
    CHECK(a.at("analysis") == b.at("analysis"));
    CHECK(a.at("model") == b.at("model"));
}

TEST_CASE("seeded concretization changes reported quantities reproducibly") {
    const std::vector<std::string> args{"analyze",      fixture_path("ex3.model"),
                                        "--concretize", "seeded:5",
                                        "--output",     "json"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const json doc = json::parse(a.out);
    CHECK(doc.at("config").at("concretization") == "seeded:5");
    // structure-level verdicts are concretization-independent
    CHECK(doc.at("analysis").at("arbitrary_switching").at("verdict") == "GUARANTEED");

    const auto bad = run_cli({"analyze", fixture_path("ex3.model"), "--concretize", "always"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("unknown concretization strategy") != std::string::npos);
}

TEST_CASE("analyze exports graphs when asked") {
    const auto dir = std::filesystem::temp_directory_path() / "switchmc_graphs";
    std::filesystem::remove_all(dir);
    const auto result =
        run_cli({"analyze", fixture_path("ex4.model"), "--export-graphs", dir.string()});
    CHECK(result.code == 0);
    CHECK(std::filesystem::exists(dir / "union.txt"));
    CHECK(std::filesystem::exists(dir / "union.dot"));
    CHECK(std::filesystem::exists(dir / "intersection.dot"));
    CHECK(std::filesystem::exists(dir / "mode1.txt"));

    std::ifstream txt(dir / "union.txt");
    std::stringstream buffer;
    buffer << txt.rdbuf();
    CHECK(buffer.str() == "a1 a2\na1 a3\na2 a3\na2 a4\na3 a4\n");
}

TEST_CASE("help is not an error") {
    CHECK(run_cli({"--help"}).code == 0);
}
