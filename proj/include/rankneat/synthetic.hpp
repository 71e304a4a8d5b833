#pragma once

#include "rankneat/dataset.hpp"
#include "rankneat/ranker.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rankneat {

/// Desk-scale corpus drawn from a sparse linear ground truth. The true
/// weights have unit L2 norm, so the latent score of a window has unit
/// variance and `label_noise_std` reads as a noise-to-signal ratio.
struct SyntheticSpec {
    std::size_t dimension = 32;
    double signal_fraction = 0.5;
    std::size_t participants = 30;
    std::size_t windows_per_session = 40;
    double label_noise_std = 0.25;
    double window_seconds = 3.0;
    double lag_seconds = 1.0;
    std::uint64_t seed = 0;

    void validate() const;

    bool operator==(const SyntheticSpec&) const = default;
};

struct SyntheticCorpus {
    std::vector<WindowedSession> sessions;  // one session per participant
    std::vector<AnnotationTrace> traces;    // raw, as written to the annotations file
    LinearRanker true_weights;
};

/// round(signal_fraction * d) randomly placed features with weight
/// +-1/sqrt(count); every other feature is pure noise.
LinearRanker true_weights(const SyntheticSpec& spec);

/// Labels go through the same normalize/window/align path as ingested data,
/// so writing the traces and features out and ingesting them again yields
/// identical sessions.
SyntheticCorpus generate(const SyntheticSpec& spec);

struct BayesEstimate {
    double accuracy = 0.0;
    double standard_error = 0.0;  // clustered by session
    std::size_t pairs = 0;        // unordered pairs scored
    std::size_t sessions = 0;
};

/// Pair accuracy of the true ranker on freshly drawn sessions until at least
/// `samples` unordered pairs (>= 10^4) have been scored.
BayesEstimate bayes_accuracy(const SyntheticSpec& spec, double threshold, std::size_t samples);

}  // namespace rankneat
