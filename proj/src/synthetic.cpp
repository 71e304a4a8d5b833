#include "rankneat/synthetic.hpp"

#include "rankneat/error.hpp"
#include "rankneat/random.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace rankneat {

namespace {

constexpr std::uint64_t kWeightStream = 0;
constexpr std::uint64_t kCorpusStream = 1;
constexpr std::uint64_t kBayesStream = 2;

struct DrawnSession {
    WindowedSession session;
    AnnotationTrace trace;
};

DrawnSession draw_session(const SyntheticSpec& spec, const LinearRanker& truth, std::size_t index,
                          Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto session_id = fmt::format("s{:03}", index);
    const auto participant_id = fmt::format("p{:03}", index);

    std::vector<FeatureWindow> windows;
    AnnotationTrace trace{session_id, participant_id, {}};
    for (std::size_t k = 0; k < spec.windows_per_session; ++k) {
        FeatureWindow window{session_id, k, std::vector<double>(spec.dimension)};
        for (auto& v : window.features) v = normal(rng);
        double latent = score(truth, window.features);
        if (spec.label_noise_std > 0.0) latent += spec.label_noise_std * normal(rng);
        // one sample per window, placed mid-window once the lag is removed
        const double time = static_cast<double>(k) * spec.window_seconds + spec.lag_seconds +
                            0.5 * spec.window_seconds;
        trace.samples.push_back({time, latent});
        windows.push_back(std::move(window));
    }
    auto session = align_session(trace, windows, {spec.window_seconds, spec.lag_seconds});
    return {std::move(session), std::move(trace)};
}

}  // namespace

void SyntheticSpec::validate() const {
    if (dimension < 2) throw Error(ErrorKind::InvalidArgument, "synthetic dimension must be >= 2");
    if (!(signal_fraction > 0.0 && signal_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "signal fraction must lie in (0,1]");
    }
    if (participants == 0) throw Error(ErrorKind::InvalidArgument, "need at least one participant");
    if (windows_per_session < 2) {
        throw Error(ErrorKind::InvalidArgument, "need at least two windows per session");
    }
    if (!(label_noise_std >= 0.0) || !std::isfinite(label_noise_std)) {
        throw Error(ErrorKind::InvalidArgument, "label noise must be finite and non-negative");
    }
    if (!(window_seconds > 0.0) || !(lag_seconds >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "window length must be positive, lag non-negative");
    }
}

LinearRanker true_weights(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, {kWeightStream}));
    const auto count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(spec.signal_fraction * static_cast<double>(spec.dimension))),
        1, spec.dimension);
    std::vector<std::size_t> indices(spec.dimension);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    std::shuffle(indices.begin(), indices.end(), rng);
    indices.resize(count);

    std::bernoulli_distribution sign(0.5);
    const double magnitude = 1.0 / std::sqrt(static_cast<double>(count));
    std::vector<LinearRanker::Entry> entries;
    for (auto index : indices) entries.push_back({index, sign(rng) ? magnitude : -magnitude});
    return LinearRanker(spec.dimension, std::move(entries));
}

SyntheticCorpus generate(const SyntheticSpec& spec) {
    SyntheticCorpus corpus{{}, {}, true_weights(spec)};
    for (std::size_t p = 0; p < spec.participants; ++p) {
        Rng rng(derive_seed(spec.seed, {kCorpusStream, p}));
        auto drawn = draw_session(spec, corpus.true_weights, p, rng);
        corpus.sessions.push_back(std::move(drawn.session));
        corpus.traces.push_back(std::move(drawn.trace));
    }
    return corpus;
}

BayesEstimate bayes_accuracy(const SyntheticSpec& spec, double threshold, std::size_t samples) {
    if (samples < 10'000) {
        throw Error(ErrorKind::InvalidArgument, "Monte-Carlo estimate needs at least 10^4 pairs");
    }
    const auto truth = true_weights(spec);
    constexpr std::size_t kMaxSessions = 10'000'000;

    std::vector<double> credit;
    std::vector<double> counts;
    double total_credit = 0.0;
    double total_pairs = 0.0;
    for (std::size_t s = 0; total_pairs < static_cast<double>(samples); ++s) {
        if (s == kMaxSessions) {
            throw Error(ErrorKind::EmptyResult, "synthetic sessions yield no pairs at this threshold");
        }
        Rng rng(derive_seed(spec.seed, {kBayesStream, s}));
        const auto drawn = draw_session(spec, truth, s, rng);
        double c = 0.0;
        double n = 0.0;
        for (const auto& pair : build_pairs(drawn.session, threshold)) {
            if (pair.first > pair.second) continue;  // each orientation pair once
            const auto& w = drawn.session.windows;
            const double z = score(truth, w[pair.first].features) - score(truth, w[pair.second].features);
            if (z == 0.0) {
                c += 0.5;
            } else if ((z > 0.0) == (pair.label == 1)) {
                c += 1.0;
            }
            n += 1.0;
        }
        credit.push_back(c);
        counts.push_back(n);
        total_credit += c;
        total_pairs += n;
    }

    BayesEstimate estimate;
    estimate.accuracy = total_credit / total_pairs;
    estimate.pairs = static_cast<std::size_t>(total_pairs);
    estimate.sessions = credit.size();
    double squares = 0.0;
    for (std::size_t s = 0; s < credit.size(); ++s) {
        const double r = credit[s] - estimate.accuracy * counts[s];
        squares += r * r;
    }
    const auto clusters = static_cast<double>(credit.size());
    estimate.standard_error =
        clusters > 1.0 ? std::sqrt(squares * clusters / (clusters - 1.0)) / total_pairs : 0.0;
    return estimate;
}

}  // namespace rankneat
