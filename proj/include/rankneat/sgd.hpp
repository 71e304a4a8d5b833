#pragma once

#include "rankneat/dataset.hpp"
#include "rankneat/random.hpp"
#include "rankneat/ranker.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rankneat {

// ---------------------------------------------------------------------------
// Trajectory shared by both trainers
// ---------------------------------------------------------------------------

struct IterationRecord {
    std::size_t iteration = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double mean_loss = 0.0;  // mean training BCE

    bool operator==(const IterationRecord&) const = default;
};

struct TrainTrajectory {
    std::vector<IterationRecord> records;  // iterations strictly increasing

    bool operator==(const TrainTrajectory&) const = default;
};

/// CSV `iteration,train_acc,test_acc,mean_loss`.
void write_trajectory_csv(std::ostream& out, const TrainTrajectory& trajectory);

// ---------------------------------------------------------------------------
// RankNet: plain minibatch SGD on the pairwise BCE
// ---------------------------------------------------------------------------

struct SgdConfig {
    std::size_t batch_number = 10;  // pairs sampled per epoch
    double learning_rate = 0.01;
    std::size_t epochs = 1500;
    std::uint64_t seed = 0;

    bool operator==(const SgdConfig&) const = default;
};

/// d(bce(sigmoid(z), y))/dw = (sigmoid(z) - y) * (x_i - x_j), dense over d.
std::vector<double> pair_gradient(const LinearRanker& ranker, std::span<const double> first,
                                  std::span<const double> second, int label);

/// Fully connected ranker with i.i.d. N(0,1) weights.
LinearRanker random_dense_ranker(std::size_t dimension, Rng& rng);

/// One epoch: `batch_number` pairs drawn without replacement, gradients
/// averaged, one step of size `learning_rate`.
LinearRanker train_epoch(const LinearRanker& ranker, const PairDataset& training,
                         const SgdConfig& config, Rng& rng);

struct SgdResult {
    TrainTrajectory trajectory;  // iteration 0 plus one record per epoch
    LinearRanker final_ranker;
};

/// Runs every epoch (no early stopping). Epoch e draws from a generator seeded
/// by (seed, e), so runs are reproducible epoch by epoch.
SgdResult train(const LinearRanker& initial, const PairDataset& training, const PairDataset& test,
                const SgdConfig& config);

}  // namespace rankneat
