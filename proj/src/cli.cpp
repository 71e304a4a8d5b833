#include "rankneat/cli.hpp"

#include "rankneat/config.hpp"
#include "rankneat/error.hpp"
#include "rankneat/evaluation.hpp"
#include "rankneat/synthetic.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace rankneat {

namespace {

// Failures are tagged with the stage they happened in; the stage decides the
// exit code.
struct StageError {
    ExitCode code;
    std::string message;
};

template <class Fn>
auto in_stage(ExitCode code, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError{code, e.what()};
    }
}

void write_atomically(const fs::path& path, const std::string& content) {
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", tmp.string()));
        out << content;
        if (!out) throw Error(ErrorKind::Io, fmt::format("failed writing {}", tmp.string()));
    }
    fs::rename(tmp, path);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, fmt::format("{}: {}", path.string(), e.what()));
    }
}

IngestResult ingest_inputs(const RunConfig& config, std::ostream& err) {
    if (config.features.empty() || config.annotations.empty()) {
        throw StageError{kExitConfigError, "both features and annotations paths are required"};
    }
    auto result = in_stage(kExitDataError, [&] {
        return ingest(config.features, config.annotations, config.dataset);
    });
    for (const auto& drop : result.dropped) {
        err << "dropped session " << drop.session_id << ": " << drop.reason << '\n';
    }
    return result;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_gen_synth(const RunConfig& config, std::ostream& out) {
    const auto spec = in_stage(kExitConfigError, [&] {
        auto s = config.synthetic_spec();
        s.validate();
        return s;
    });
    const auto corpus = generate(spec);
    const fs::path dir = config.out;
    in_stage(kExitDataError, [&] {
        fs::create_directories(dir);
        std::ostringstream features;
        write_features_csv(features, corpus.sessions);
        write_atomically(dir / "features.csv", features.str());
        std::ostringstream annotations;
        write_annotations_csv(annotations, corpus.traces);
        write_atomically(dir / "annotations.csv", annotations.str());
        write_atomically(dir / "true_weights.json", to_json(corpus.true_weights).dump(2) + "\n");
    });
    out << fmt::format("wrote {} sessions (d={}, {} signal features) to {}\n", corpus.sessions.size(),
                       spec.dimension, corpus.true_weights.size(), dir.string());
    if (config.bayes_samples > 0) {
        for (double t : config.thresholds) {
            const auto estimate = in_stage(kExitConfigError, [&] {
                return bayes_accuracy(spec, t, config.bayes_samples);
            });
            out << fmt::format("bayes_accuracy P_t={} acc={:.6f} se={:.6f} pairs={}\n", t,
                               estimate.accuracy, estimate.standard_error, estimate.pairs);
        }
    }
}

void cmd_build_pairs(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto data = ingest_inputs(config, err);
    out << fmt::format("sessions={} dropped={}\n", data.sessions.size(), data.dropped.size());
    std::vector<std::pair<double, std::size_t>> counts;
    for (double t : config.thresholds) counts.emplace_back(t, count_pairs(data.sessions, t));
    const auto reference = std::min_element(counts.begin(), counts.end());
    for (const auto& [t, n] : counts) {
        const auto ratio = reference->second == 0
                               ? std::string("n/a")
                               : fmt::format("{:.4f}", static_cast<double>(n) /
                                                           static_cast<double>(reference->second));
        out << fmt::format("P_t={} pairs={} volume_ratio_vs_{}={}\n", t, n, reference->first, ratio);
    }
}

void cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto trainer = config.trainer_spec();
    const auto settings = config.experiment_settings();
    in_stage(kExitConfigError, [&] {
        if (config.thresholds.size() != 1) {
            throw Error(ErrorKind::InvalidArgument, "train takes exactly one preference threshold");
        }
        if (trainer.kind == TrainerKind::RankNeat) trainer.neat.validate();
        if (settings.folds < 2 || settings.runs == 0 || settings.budget == 0) {
            throw Error(ErrorKind::InvalidArgument, "folds >= 2, runs >= 1 and budget >= 1 are required");
        }
    });
    const auto data = ingest_inputs(config, err);
    const auto report = in_stage(kExitTrainingError, [&] {
        return run_experiment(data.sessions, trainer, settings);
    });

    const fs::path dir = config.out;
    const auto name = std::string(to_string(trainer.kind));
    in_stage(kExitTrainingError, [&] {
        fs::create_directories(dir);
        for (const auto& job : report.jobs) {
            const auto stem = fmt::format("{}_run{}_fold{}", name, job.run, job.fold);
            std::ostringstream trajectory;
            write_trajectory_csv(trajectory, job.trajectory);
            write_atomically(dir / (stem + ".csv"), trajectory.str());
            if (trainer.kind == TrainerKind::RankNeat) {
                std::ostringstream evolution;
                write_evolution_csv(evolution, job.generations);
                write_atomically(dir / (stem + "_evolution.csv"), evolution.str());
                nlohmann::json champions = nlohmann::json::array();
                for (const auto& c : job.checkpoints) champions.push_back(to_json(c));
                write_atomically(dir / (stem + "_champions.json"), champions.dump(1) + "\n");
            }
            write_atomically(dir / (stem + "_model.json"), to_json(job.final_model).dump(1) + "\n");
        }
        auto json = to_json(report.summary);
        json["metadata"] = {{"created", utc_timestamp()}};
        write_atomically(dir / (name + "_report.json"), json.dump(2) + "\n");
    });
    out << fmt::format("{} P_t={} best {} over {} iterations ({} jobs) -> {}\n", name,
                       settings.threshold, format_best(report.summary), settings.budget,
                       report.jobs.size(), dir.string());
}

void cmd_compare(const RunConfig& config, const std::string& first_path,
                 const std::string& second_path, std::ostream& out) {
    const auto [first, second, rows] = in_stage(kExitDataError, [&] {
        auto a = summary_from_json(read_json(first_path));
        auto b = summary_from_json(read_json(second_path));
        auto r = compare_reports(a, b);
        return std::tuple{std::move(a), std::move(b), std::move(r)};
    });
    const fs::path dir = config.out;
    in_stage(kExitDataError, [&] {
        fs::create_directories(dir);
        std::ostringstream csv;
        write_comparison_csv(csv, first, second, rows);
        write_atomically(dir / "comparison.csv", csv.str());
    });
    out << fmt::format("{}: {}\n", to_string(first.trainer), format_best(first));
    out << fmt::format("{}: {}\n", to_string(second.trainer), format_best(second));
    if (!rows.empty()) {
        const auto& last = rows.back();
        out << fmt::format("iteration {}: difference {:+.4f}\n", last.iteration, last.difference());
    }
    out << "comparison written to " << (dir / "comparison.csv").string() << '\n';
}

void cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
    for (const auto& path : paths) {
        const auto summary = in_stage(kExitDataError, [&] { return summary_from_json(read_json(path)); });
        out << fmt::format("{:<9} P_t={:<5} K={} runs={} budget={}  {}\n", to_string(summary.trainer),
                           summary.threshold, summary.folds, summary.runs, summary.budget,
                           format_best(summary));
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairwise preference learning with RankNet (SGD) and RankNEAT (neuroevolution)",
                 "rankneat"};
    app.require_subcommand(1);

    std::string config_path;
    bool dump_config = false;
    std::vector<std::pair<std::string, std::string>> given;
    std::vector<std::string> report_paths;
    std::string compare_a;
    std::string compare_b;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_flag("--dump-config", dump_config, "print the effective configuration and exit");
        for (const auto& key : config_keys()) {
            const std::string name(key.name);
            sub->add_option_function<std::string>(
                "--" + std::string(key.flag),
                [&given, name](const std::string& v) { given.emplace_back(name, v); },
                std::string(key.help));
        }
    };

    auto* gen = app.add_subcommand("gen-synth", "write a synthetic corpus in the ingestion formats");
    auto* pairs = app.add_subcommand("build-pairs", "count preference pairs per threshold");
    auto* trainer = app.add_subcommand("train", "cross-validated training run");
    auto* compare = app.add_subcommand("compare", "align two reports on a common iteration grid");
    auto* report = app.add_subcommand("report", "summarize report files");
    for (auto* sub : {gen, pairs, trainer, compare, report}) add_common(sub);
    compare->add_option("first", compare_a, "first report JSON")->required();
    compare->add_option("second", compare_b, "second report JSON")->required();
    report->add_option("reports", report_paths, "report JSON files")->required();

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        RunConfig config = in_stage(kExitConfigError, [&] {
            RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
            for (const auto& [name, value] : given) c.set(name, value);
            return c;
        });
        if (dump_config) {
            out << config.dump();
            return kExitOk;
        }
        if (gen->parsed()) cmd_gen_synth(config, out);
        if (pairs->parsed()) cmd_build_pairs(config, out, err);
        if (trainer->parsed()) cmd_train(config, out, err);
        if (compare->parsed()) cmd_compare(config, compare_a, compare_b, out);
        if (report->parsed()) cmd_report(report_paths, out);
        return kExitOk;
    } catch (const StageError& e) {
        err << "error: " << e.message << '\n';
        return e.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitTrainingError;
    }
}

}  // namespace rankneat
