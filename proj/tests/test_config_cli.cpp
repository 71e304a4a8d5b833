#include "rankneat/cli.hpp"
#include "rankneat/config.hpp"
#include "rankneat/error.hpp"

#include <chrono>
#include <cstdlib>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

using namespace rankneat;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    const char* env = std::getenv("RANKNEAT_TMP");
    const fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "rankneat_test_cli";
    fs::create_directories(dir);
    return dir;
}

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation run(std::vector<std::string> args) {
    args.insert(args.begin(), "rankneat");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// desk-spec corpus shared by the CLI cases
fs::path corpus_dir() {
    static const fs::path dir = [] {
        const auto d = work_dir() / "corpus";
        const auto r = run({"gen-synth", "--out", d.string(), "--seed", "3"});
        REQUIRE(r.code == 0);
        return d;
    }();
    return dir;
}

std::vector<std::string> data_flags() {
    return {"--features", (corpus_dir() / "features.csv").string(), "--annotations",
            (corpus_dir() / "annotations.csv").string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("config dump round trip") {
    RunConfig c;
    c.set("preference_threshold", "0.15, 0.5");
    c.set("batch_number", "25");
    c.set("learning_rate", "0.003");
    c.set("trainer", "ranknet");
    c.set("features", "a.csv");
    c.set("weight_perturb_std", "0.1");
    c.set("seed", "18446744073709551615");
    std::istringstream in(c.dump());
    CHECK(parse_config(in) == c);

    std::istringstream defaults(RunConfig{}.dump());
    CHECK(parse_config(defaults) == RunConfig{});
}

TEST_CASE("config parsing rules") {
    std::istringstream in("# experiment\r\n\nbudget = 300   # short\r\npopulation_size=50\n");
    const auto c = parse_config(in);
    CHECK(c.budget == 300);
    CHECK(c.neat.population_size == 50);

    std::istringstream unknown("no_such_key = 1\n");
    CHECK_THROWS_AS(parse_config(unknown), Error);
    std::istringstream malformed("budget 300\n");
    CHECK_THROWS_AS(parse_config(malformed), Error);
    RunConfig r;
    CHECK_THROWS_AS(r.set("budget", "-3"), Error);
    CHECK_THROWS_AS(r.set("budget", "1.5"), Error);
    CHECK_THROWS_AS(r.set("preference_threshold", "1.0"), Error);
    CHECK_THROWS_AS(r.set("learning_rate", "nan"), Error);
    CHECK_THROWS_AS(r.set("trainer", "adam"), Error);
}

TEST_CASE("every config key has a flag and documented default") {
    std::set<std::string_view> names;
    std::set<std::string_view> flags;
    for (const auto& key : config_keys()) {
        CHECK(names.insert(key.name).second);
        CHECK(flags.insert(key.flag).second);
        CHECK_FALSE(key.help.empty());
    }
    for (const char* flag : {"pt", "bn", "pop", "budget", "runs", "folds", "seed", "jobs", "trainer", "out"}) {
        CHECK(flags.contains(flag));
    }
}

TEST_CASE("flags override the config file and dump reloads") {
    const auto file = work_dir() / "override.cfg";
    std::ofstream(file) << "budget = 300\nruns = 2\n";
    const auto r = run({"train", "--config", file.string(), "--runs", "4", "--pt", "0.5", "--dump-config"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto c = parse_config(in);
    CHECK(c.budget == 300);
    CHECK(c.runs == 4);
    CHECK(c.thresholds == std::vector<double>{0.5});
}

TEST_CASE("exit codes for bad invocations") {
    CHECK(run({}).code == kExitConfigError);
    CHECK(run({"train", "--no-such-flag", "1"}).code == kExitConfigError);
    CHECK(run({"train", "--budget", "lots"}).code == kExitConfigError);
    CHECK(run({"train", "--config", (work_dir() / "missing.cfg").string()}).code == kExitConfigError);
    CHECK(run({"train"}).code == kExitConfigError);
    CHECK(run({"train", "--node-mutation-rate", "0.2", "--features", "f", "--annotations", "a"}).code ==
          kExitConfigError);
    CHECK(run({"--help"}).code == kExitOk);

    const auto missing = run({"build-pairs", "--features", (work_dir() / "nope.csv").string(),
                              "--annotations", (work_dir() / "nope2.csv").string()});
    CHECK(missing.code == kExitDataError);
    CHECK(missing.err.find("nope.csv") != std::string::npos);
    CHECK(run({"report", (work_dir() / "nope.json").string()}).code == kExitDataError);
}

TEST_CASE("gen-synth writes the ingestion formats") {
    const auto dir = corpus_dir();
    CHECK(fs::exists(dir / "features.csv"));
    CHECK(fs::exists(dir / "annotations.csv"));
    const auto weights = nlohmann::json::parse(slurp(dir / "true_weights.json"));
    CHECK(weights["dimension"] == 32);
    CHECK(line_count(dir / "features.csv") == 1 + 30 * 40);

    const auto with_oracle = run({"gen-synth", "--out", (work_dir() / "oracle").string(), "--bayes-samples",
                                  "10000", "--pt", "0.15,0.5"});
    REQUIRE(with_oracle.code == 0);
    CHECK(with_oracle.out.find("bayes_accuracy P_t=0.15") != std::string::npos);
    CHECK(with_oracle.out.find("bayes_accuracy P_t=0.5") != std::string::npos);
}

TEST_CASE("build-pairs counts are monotone in the threshold") {
    const auto r = run(concat({"build-pairs", "--pt", "0.15,0.25,0.5"}, data_flags()));
    REQUIRE(r.code == 0);
    std::vector<std::size_t> counts;
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);) {
        const auto at = line.find("pairs=");
        if (at != std::string::npos && line.starts_with("P_t=")) counts.push_back(std::stoul(line.substr(at + 6)));
    }
    REQUIRE(counts.size() == 3);
    CHECK(counts[0] >= counts[1]);
    CHECK(counts[1] >= counts[2]);
    CHECK(counts[2] > 0);
}

TEST_CASE("build-pairs on a fixture without sessions") {
    const auto features = work_dir() / "empty.features.csv";
    const auto annotations = work_dir() / "empty.annotations.csv";
    std::ofstream(features) << "session_id,participant_id,window_index,f0\n";
    std::ofstream(annotations) << "session_id,time_seconds,value\n";
    const auto r = run({"build-pairs", "--features", features.string(), "--annotations", annotations.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("pairs=0") != std::string::npos);
}

TEST_CASE("train, compare and report") {
    const auto out = work_dir() / "train";
    fs::remove_all(out);
    const auto started = std::chrono::steady_clock::now();
    const auto neat = run(concat({"train", "--trainer", "rankneat", "--budget", "1500", "--pop", "100", "--runs",
                                  "1", "--folds", "2", "--out", out.string()},
                                 data_flags()));
    const auto seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    REQUIRE(neat.code == 0);
    CHECK(seconds < 60.0);
    CHECK(line_count(out / "rankneat_run0_fold0_evolution.csv") == 1 + 15);
    CHECK(line_count(out / "rankneat_run0_fold1.csv") == 1 + 15);
    const auto champions = nlohmann::json::parse(slurp(out / "rankneat_run0_fold0_champions.json"));
    CHECK(champions.size() == 15);
    CHECK(champions[14]["generation"] == 15);

    const auto net = run(concat({"train", "--trainer", "ranknet", "--budget", "1500", "--bn", "10", "--runs",
                                 "1", "--folds", "2", "--out", out.string()},
                                data_flags()));
    REQUIRE(net.code == 0);
    CHECK(line_count(out / "ranknet_run0_fold0.csv") == 1 + 1 + 1500);

    const auto report_json = nlohmann::json::parse(slurp(out / "rankneat_report.json"));
    CHECK(report_json.contains("metadata"));
    CHECK(report_json["K"] == 2);

    const auto self = run({"compare", (out / "rankneat_report.json").string(),
                           (out / "rankneat_report.json").string(), "--out", (out / "self").string()});
    REQUIRE(self.code == 0);
    std::istringstream rows(slurp(out / "self" / "comparison.csv"));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "iteration,rankneat_a_mean,rankneat_a_ci,rankneat_b_mean,rankneat_b_ci,difference");
    std::size_t n = 0;
    while (std::getline(rows, line)) {
        CHECK(line.ends_with(",0"));
        ++n;
    }
    CHECK(n == 15);

    const auto both = run({"compare", (out / "ranknet_report.json").string(),
                           (out / "rankneat_report.json").string(), "--out", out.string()});
    REQUIRE(both.code == 0);
    CHECK(line_count(out / "comparison.csv") == 1 + 15);

    const auto shorter = work_dir() / "shorter";
    fs::remove_all(shorter);
    REQUIRE(run(concat({"train", "--trainer", "rankneat", "--budget", "1000", "--pop", "100", "--runs", "1",
                        "--folds", "2", "--out", shorter.string()},
                       data_flags()))
                .code == 0);
    CHECK(run({"compare", (out / "rankneat_report.json").string(), (shorter / "rankneat_report.json").string(),
               "--out", shorter.string()})
              .code == kExitDataError);

    const auto report = run({"report", (out / "ranknet_report.json").string(),
                             (out / "rankneat_report.json").string()});
    REQUIRE(report.code == 0);
    CHECK(report.out.find("ranknet") != std::string::npos);
    CHECK(report.out.find("rankneat") != std::string::npos);
}

TEST_CASE("train output is byte-identical across repeats") {
    const auto a = work_dir() / "repeat_a";
    const auto b = work_dir() / "repeat_b";
    for (const auto& dir : {a, b}) {
        fs::remove_all(dir);
        REQUIRE(run(concat({"train", "--trainer", "rankneat", "--budget", "300", "--runs", "2", "--folds", "2",
                            "--jobs", dir == a ? "1" : "3", "--out", dir.string()},
                           data_flags()))
                    .code == 0);
    }
    for (const char* name : {"rankneat_run1_fold0.csv", "rankneat_run1_fold1_evolution.csv",
                             "rankneat_run0_fold1_champions.json"}) {
        CHECK(slurp(a / name) == slurp(b / name));
    }
    auto ja = nlohmann::json::parse(slurp(a / "rankneat_report.json"));
    auto jb = nlohmann::json::parse(slurp(b / "rankneat_report.json"));
    ja.erase("metadata");
    jb.erase("metadata");
    CHECK(ja == jb);
}
