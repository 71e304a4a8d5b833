#pragma once

#include "rankneat/dataset.hpp"
#include "rankneat/neat.hpp"
#include "rankneat/sgd.hpp"

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rankneat {

// ---------------------------------------------------------------------------
// Leave-X-participants-out folds
// ---------------------------------------------------------------------------

struct Fold {
    std::vector<std::string> held_out_participants;  // sorted
    std::vector<std::size_t> train_sessions;         // positions in the session list
    std::vector<std::size_t> test_sessions;

    bool operator==(const Fold&) const = default;
};

struct FoldPlan {
    std::size_t k = 0;
    std::vector<Fold> folds;

    bool operator==(const FoldPlan&) const = default;
};

/// Shuffles the distinct participants with `seed` and cuts them into k
/// groups whose sizes differ by at most one.
FoldPlan plan_folds(std::span<const WindowedSession> sessions, std::size_t k, std::uint64_t seed);

/// Empty when the plan is sound; otherwise one message per violation
/// (leakage, overlap between test groups, participants never tested).
std::vector<std::string> fold_plan_violations(const FoldPlan& plan,
                                              std::span<const WindowedSession> sessions);

// ---------------------------------------------------------------------------
// Confidence intervals
// ---------------------------------------------------------------------------

struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0;
};

/// Student-t interval over the values (n - 1 degrees of freedom).
ConfidenceInterval confidence_interval(std::span<const double> values, double level = 0.95);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class TrainerKind { RankNet, RankNeat };

std::string_view to_string(TrainerKind kind) noexcept;
TrainerKind parse_trainer(std::string_view name);

struct TrainerSpec {
    TrainerKind kind = TrainerKind::RankNeat;
    SgdConfig sgd;    // epochs and seed are set per job
    NeatConfig neat;  // seed is set per job
};

struct ExperimentSettings {
    double threshold = 0.25;
    std::size_t folds = 10;
    std::size_t runs = 5;
    std::size_t budget = 1500;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct JobResult {
    std::size_t run = 0;
    std::size_t fold = 0;
    TrainTrajectory trajectory;
    std::vector<GenerationRecord> generations;  // RankNEAT only
    std::vector<ChampionCheckpoint> checkpoints;  // RankNEAT only
    LinearRanker final_model;
};

struct IterationSummary {
    std::size_t iteration = 0;
    double train_accuracy = 0.0;  // mean over runs of the fold means
    double test_accuracy = 0.0;
    std::optional<double> test_ci;  // half width; needs at least 2 runs

    bool operator==(const IterationSummary&) const = default;
};

/// The part of a report that is written to and read back from JSON.
struct ReportSummary {
    TrainerKind trainer = TrainerKind::RankNeat;
    double threshold = 0.25;
    std::size_t folds = 0;
    std::size_t runs = 0;
    std::size_t budget = 0;
    double best_mean_accuracy = 0.0;
    std::optional<double> best_mean_ci;
    double best_run_accuracy = 0.0;
    std::vector<IterationSummary> per_iteration;

    bool operator==(const ReportSummary&) const = default;
};

struct ExperimentReport {
    ReportSummary summary;
    std::vector<FoldPlan> plans;  // one per run
    std::vector<JobResult> jobs;  // ordered by (run, fold)

    /// Fold-mean test accuracy of one run at each iteration.
    std::vector<double> run_test_curve(std::size_t run) const;
};

/// Per run r: reshuffle folds with a seed derived from (seed, r), build the
/// pair datasets of every fold and train to the budget. Jobs run on up to
/// `settings.jobs` threads; results do not depend on the thread count.
ExperimentReport run_experiment(std::span<const WindowedSession> sessions,
                                const TrainerSpec& trainer, const ExperimentSettings& settings);

/// Recomputes the aggregates of a report from its jobs.
ReportSummary summarize(const ExperimentReport& report);

nlohmann::json to_json(const ReportSummary& summary);
ReportSummary summary_from_json(const nlohmann::json& json);

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::size_t iteration = 0;
    double first_mean = 0.0;
    std::optional<double> first_ci;
    double second_mean = 0.0;
    std::optional<double> second_ci;

    double difference() const noexcept { return first_mean - second_mean; }
};

/// Aligns both reports on the coarser iteration grid. Throws GridMismatch
/// when the budgets differ or the finer grid lacks a coarse point.
std::vector<ComparisonRow> compare_reports(const ReportSummary& first, const ReportSummary& second);

void write_comparison_csv(std::ostream& out, const ReportSummary& first,
                          const ReportSummary& second, const std::vector<ComparisonRow>& rows);

/// "mean ±ci [best run]" in percent, e.g. "76.2 ±1.5 [77.3]".
std::string format_best(const ReportSummary& summary);

}  // namespace rankneat
