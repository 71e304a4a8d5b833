#include "rankneat/evaluation.hpp"

#include "parallel.hpp"
#include "rankneat/error.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <ostream>
#include <set>

namespace rankneat {

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

FoldPlan plan_folds(std::span<const WindowedSession> sessions, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw Error(ErrorKind::InvalidArgument,
                    "at least 2 folds are needed to hold out participants");
    }
    std::set<std::string> distinct;
    for (const auto& s : sessions) distinct.insert(s.participant_id);
    if (distinct.size() < k) {
        throw Error(ErrorKind::TooFewParticipants,
                    fmt::format("{} participants cannot fill {} folds", distinct.size(), k));
    }
    std::vector<std::string> participants(distinct.begin(), distinct.end());
    Rng rng(seed);
    std::shuffle(participants.begin(), participants.end(), rng);

    FoldPlan plan{k, {}};
    const std::size_t base = participants.size() / k;
    const std::size_t extra = participants.size() % k;
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        Fold fold;
        fold.held_out_participants.assign(participants.begin() + static_cast<std::ptrdiff_t>(cursor),
                                          participants.begin() + static_cast<std::ptrdiff_t>(cursor + size));
        std::sort(fold.held_out_participants.begin(), fold.held_out_participants.end());
        cursor += size;
        for (std::size_t s = 0; s < sessions.size(); ++s) {
            const bool held_out = std::binary_search(fold.held_out_participants.begin(),
                                                     fold.held_out_participants.end(),
                                                     sessions[s].participant_id);
            (held_out ? fold.test_sessions : fold.train_sessions).push_back(s);
        }
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

std::vector<std::string> fold_plan_violations(const FoldPlan& plan,
                                              std::span<const WindowedSession> sessions) {
    std::vector<std::string> issues;
    if (plan.folds.size() != plan.k) {
        issues.push_back(fmt::format("plan has {} folds, declares {}", plan.folds.size(), plan.k));
    }
    std::set<std::string> all;
    for (const auto& s : sessions) all.insert(s.participant_id);

    std::map<std::string, std::size_t> tested_in;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const auto& fold = plan.folds[f];
        std::set<std::string> train;
        std::set<std::string> test;
        for (auto s : fold.train_sessions) train.insert(sessions[s].participant_id);
        for (auto s : fold.test_sessions) test.insert(sessions[s].participant_id);
        for (const auto& p : test) {
            if (train.contains(p)) issues.push_back(fmt::format("fold {}: participant {} leaks", f, p));
        }
        const std::set<std::string> declared(fold.held_out_participants.begin(),
                                             fold.held_out_participants.end());
        if (declared != test) issues.push_back(fmt::format("fold {}: test sessions disagree with held-out set", f));
        if (fold.train_sessions.size() + fold.test_sessions.size() != sessions.size()) {
            issues.push_back(fmt::format("fold {}: sessions not split exhaustively", f));
        }
        for (const auto& p : declared) {
            const auto [it, fresh] = tested_in.emplace(p, f);
            if (!fresh) {
                issues.push_back(fmt::format("participant {} tested in folds {} and {}", p, it->second, f));
            }
        }
    }
    for (const auto& p : all) {
        if (!tested_in.contains(p)) issues.push_back(fmt::format("participant {} never tested", p));
    }
    return issues;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

ConfidenceInterval confidence_interval(std::span<const double> values, double level) {
    if (values.size() < 2) {
        throw Error(ErrorKind::TooFewValues, "a confidence interval needs at least 2 values");
    }
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double squares = 0.0;
    for (double v : values) squares += (v - mean) * (v - mean);
    const double sd = std::sqrt(squares / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(dist, 1.0 - (1.0 - level) / 2.0);
    return {mean, t * sd / std::sqrt(n)};
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

std::string_view to_string(TrainerKind kind) noexcept {
    return kind == TrainerKind::RankNet ? "ranknet" : "rankneat";
}

TrainerKind parse_trainer(std::string_view name) {
    if (name == "ranknet") return TrainerKind::RankNet;
    if (name == "rankneat") return TrainerKind::RankNeat;
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("unknown trainer '{}' (expected ranknet or rankneat)", name));
}

std::vector<double> ExperimentReport::run_test_curve(std::size_t run) const {
    std::vector<double> curve;
    std::size_t folds = 0;
    for (const auto& job : jobs) {
        if (job.run != run) continue;
        const auto& records = job.trajectory.records;
        if (curve.empty()) curve.assign(records.size(), 0.0);
        for (std::size_t t = 0; t < records.size(); ++t) curve[t] += records[t].test_accuracy;
        ++folds;
    }
    for (auto& v : curve) v /= static_cast<double>(folds);
    return curve;
}

namespace {

JobResult run_job(std::span<const WindowedSession> sessions, const Fold& fold,
                  const TrainerSpec& trainer, const ExperimentSettings& settings,
                  std::uint64_t job_seed, std::size_t eval_threads) {
    auto pick = [&](const std::vector<std::size_t>& positions) {
        std::vector<WindowedSession> chosen;
        chosen.reserve(positions.size());
        for (auto s : positions) chosen.push_back(sessions[s]);
        return PairDataset(std::move(chosen), settings.threshold);
    };
    const auto training = pick(fold.train_sessions);
    const auto test = pick(fold.test_sessions);

    JobResult job;
    if (trainer.kind == TrainerKind::RankNet) {
        auto config = trainer.sgd;
        config.epochs = settings.budget;
        config.seed = job_seed;
        Rng init_rng(derive_seed(job_seed, {0}));
        auto result = train(random_dense_ranker(training.dimension(), init_rng), training, test, config);
        job.trajectory = std::move(result.trajectory);
        job.final_model = std::move(result.final_ranker);
    } else {
        auto config = trainer.neat;
        config.seed = job_seed;
        config.eval_threads = eval_threads;
        auto result = evolve(training, test, config, settings.budget);
        job.trajectory = std::move(result.trajectory);
        job.generations = std::move(result.generations);
        job.checkpoints = std::move(result.checkpoints);
        job.final_model = result.champion.decode();
    }
    return job;
}

}  // namespace

ExperimentReport run_experiment(std::span<const WindowedSession> sessions,
                                const TrainerSpec& trainer, const ExperimentSettings& settings) {
    if (settings.folds < 2) {
        throw Error(ErrorKind::InvalidArgument, "at least 2 folds are required");
    }
    if (settings.runs == 0 || settings.budget == 0) {
        throw Error(ErrorKind::InvalidArgument, "runs and budget must be positive");
    }
    if (trainer.kind == TrainerKind::RankNeat) trainer.neat.validate();

    ExperimentReport report;
    struct Slot {
        std::size_t run;
        std::size_t fold;
    };
    std::vector<Slot> slots;
    for (std::size_t r = 0; r < settings.runs; ++r) {
        report.plans.push_back(plan_folds(sessions, settings.folds, derive_seed(settings.seed, {r, 0})));
        for (std::size_t f = 0; f < settings.folds; ++f) slots.push_back({r, f});
    }

    const std::size_t workers = std::max<std::size_t>(settings.jobs, 1);
    const std::size_t eval_threads = workers > 1 ? 1 : trainer.neat.eval_threads;
    report.jobs.resize(slots.size());
    detail::parallel_for(slots.size(), workers, [&](std::size_t i) {
        const auto [r, f] = slots[i];
        auto job = run_job(sessions, report.plans[r].folds[f], trainer, settings,
                           derive_seed(settings.seed, {r, f + 1}), eval_threads);
        job.run = r;
        job.fold = f;
        report.jobs[i] = std::move(job);
    });

    report.summary.trainer = trainer.kind;
    report.summary.threshold = settings.threshold;
    report.summary.folds = settings.folds;
    report.summary.runs = settings.runs;
    report.summary.budget = settings.budget;
    report.summary = summarize(report);
    return report;
}

ReportSummary summarize(const ExperimentReport& report) {
    ReportSummary summary = report.summary;
    summary.per_iteration.clear();
    if (report.jobs.empty()) return summary;

    const auto& grid = report.jobs.front().trajectory.records;
    for (const auto& job : report.jobs) {
        if (job.trajectory.records.size() != grid.size()) {
            throw Error(ErrorKind::GridMismatch, "jobs recorded different iteration grids");
        }
    }
    const std::size_t runs = summary.runs;
    std::vector<std::vector<double>> run_train(runs, std::vector<double>(grid.size(), 0.0));
    std::vector<std::vector<double>> run_test(runs, std::vector<double>(grid.size(), 0.0));
    std::vector<std::size_t> folds_in_run(runs, 0);
    for (const auto& job : report.jobs) {
        ++folds_in_run[job.run];
        for (std::size_t t = 0; t < grid.size(); ++t) {
            const auto& rec = job.trajectory.records[t];
            if (rec.iteration != grid[t].iteration) {
                throw Error(ErrorKind::GridMismatch, "jobs recorded different iteration grids");
            }
            run_train[job.run][t] += rec.train_accuracy;
            run_test[job.run][t] += rec.test_accuracy;
        }
    }
    for (std::size_t r = 0; r < runs; ++r) {
        for (std::size_t t = 0; t < grid.size(); ++t) {
            run_train[r][t] /= static_cast<double>(folds_in_run[r]);
            run_test[r][t] /= static_cast<double>(folds_in_run[r]);
        }
    }

    std::vector<double> column(runs);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        IterationSummary point{grid[t].iteration, 0.0, 0.0, std::nullopt};
        for (std::size_t r = 0; r < runs; ++r) {
            point.train_accuracy += run_train[r][t];
            column[r] = run_test[r][t];
        }
        point.train_accuracy /= static_cast<double>(runs);
        if (runs >= 2) {
            const auto ci = confidence_interval(column);
            point.test_accuracy = ci.mean;
            point.test_ci = ci.half_width;
        } else {
            point.test_accuracy = column.front();
        }
        summary.per_iteration.push_back(point);
    }

    const auto best = std::max_element(
        summary.per_iteration.begin(), summary.per_iteration.end(),
        [](const auto& a, const auto& b) { return a.test_accuracy < b.test_accuracy; });
    summary.best_mean_accuracy = best->test_accuracy;
    summary.best_mean_ci = best->test_ci;
    summary.best_run_accuracy = 0.0;
    for (const auto& curve : run_test) {
        summary.best_run_accuracy =
            std::max(summary.best_run_accuracy, *std::max_element(curve.begin(), curve.end()));
    }
    return summary;
}

nlohmann::json to_json(const ReportSummary& summary) {
    auto optional = [](const std::optional<double>& v) -> nlohmann::json {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : summary.per_iteration) {
        points.push_back({{"iteration", p.iteration},
                          {"train_acc", p.train_accuracy},
                          {"test_acc", p.test_accuracy},
                          {"test_ci", optional(p.test_ci)}});
    }
    return {{"trainer", to_string(summary.trainer)},
            {"P_t", summary.threshold},
            {"K", summary.folds},
            {"runs", summary.runs},
            {"budget", summary.budget},
            {"best_mean_acc", summary.best_mean_accuracy},
            {"best_mean_ci", optional(summary.best_mean_ci)},
            {"best_run_acc", summary.best_run_accuracy},
            {"per_iteration", points}};
}

ReportSummary summary_from_json(const nlohmann::json& json) {
    auto optional = [](const nlohmann::json& v) -> std::optional<double> {
        if (v.is_null()) return std::nullopt;
        return v.get<double>();
    };
    try {
        ReportSummary s;
        s.trainer = parse_trainer(json.at("trainer").get<std::string>());
        s.threshold = json.at("P_t").get<double>();
        s.folds = json.at("K").get<std::size_t>();
        s.runs = json.at("runs").get<std::size_t>();
        s.budget = json.at("budget").get<std::size_t>();
        s.best_mean_accuracy = json.at("best_mean_acc").get<double>();
        s.best_mean_ci = optional(json.at("best_mean_ci"));
        s.best_run_accuracy = json.at("best_run_acc").get<double>();
        for (const auto& p : json.at("per_iteration")) {
            s.per_iteration.push_back({p.at("iteration").get<std::size_t>(),
                                       p.at("train_acc").get<double>(),
                                       p.at("test_acc").get<double>(), optional(p.at("test_ci"))});
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

std::vector<ComparisonRow> compare_reports(const ReportSummary& first, const ReportSummary& second) {
    if (first.budget != second.budget) {
        throw Error(ErrorKind::GridMismatch,
                    fmt::format("budgets differ: {} vs {}", first.budget, second.budget));
    }
    const bool first_coarse = first.per_iteration.size() <= second.per_iteration.size();
    const auto& coarse = first_coarse ? first : second;
    const auto& fine = first_coarse ? second : first;
    std::map<std::size_t, const IterationSummary*> fine_at;
    for (const auto& p : fine.per_iteration) fine_at.emplace(p.iteration, &p);

    std::vector<ComparisonRow> rows;
    for (const auto& c : coarse.per_iteration) {
        const auto it = fine_at.find(c.iteration);
        if (it == fine_at.end()) {
            throw Error(ErrorKind::GridMismatch,
                        fmt::format("iteration {} missing from the finer grid", c.iteration));
        }
        const auto& a = first_coarse ? c : *it->second;
        const auto& b = first_coarse ? *it->second : c;
        rows.push_back({c.iteration, a.test_accuracy, a.test_ci, b.test_accuracy, b.test_ci});
    }
    return rows;
}

void write_comparison_csv(std::ostream& out, const ReportSummary& first,
                          const ReportSummary& second, const std::vector<ComparisonRow>& rows) {
    std::string a(to_string(first.trainer));
    std::string b(to_string(second.trainer));
    if (a == b) {
        a += "_a";
        b += "_b";
    }
    auto ci = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
    out << fmt::format("iteration,{0}_mean,{0}_ci,{1}_mean,{1}_ci,difference\n", a, b);
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{}\n", r.iteration, r.first_mean, ci(r.first_ci),
                           r.second_mean, ci(r.second_ci), r.difference());
    }
}

std::string format_best(const ReportSummary& summary) {
    if (summary.best_mean_ci) {
        return fmt::format("{:.1f} ±{:.1f} [{:.1f}]", 100.0 * summary.best_mean_accuracy,
                           100.0 * *summary.best_mean_ci, 100.0 * summary.best_run_accuracy);
    }
    return fmt::format("{:.1f} [{:.1f}]", 100.0 * summary.best_mean_accuracy,
                       100.0 * summary.best_run_accuracy);
}

}  // namespace rankneat
