#include "rankneat/sgd.hpp"

#include "rankneat/error.hpp"

#include <fmt/format.h>
#include <numeric>
#include <ostream>

namespace rankneat {

void write_trajectory_csv(std::ostream& out, const TrainTrajectory& trajectory) {
    out << "iteration,train_acc,test_acc,mean_loss\n";
    for (const auto& r : trajectory.records) {
        out << fmt::format("{},{},{},{}\n", r.iteration, r.train_accuracy, r.test_accuracy,
                           r.mean_loss);
    }
}

std::vector<double> pair_gradient(const LinearRanker& ranker, std::span<const double> first,
                                  std::span<const double> second, int label) {
    if (first.size() != second.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("pair sides have {} and {} components", first.size(),
                                second.size()));
    }
    const auto scored = pair_logit(ranker, first, second);
    const double residual = scored.probability - static_cast<double>(label);
    std::vector<double> gradient(first.size());
    for (std::size_t k = 0; k < first.size(); ++k) {
        gradient[k] = residual * (first[k] - second[k]);
    }
    return gradient;
}

LinearRanker random_dense_ranker(std::size_t dimension, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> weights(dimension);
    for (auto& w : weights) w = normal(rng);
    return LinearRanker::dense(weights);
}

LinearRanker train_epoch(const LinearRanker& ranker, const PairDataset& training,
                         const SgdConfig& config, Rng& rng) {
    if (training.empty()) throw Error(ErrorKind::EmptyDataset, "training set has no pairs");
    const std::size_t n = training.size();
    const std::size_t batch = config.batch_number;
    if (batch == 0 || batch > n) {
        throw Error(ErrorKind::BatchTooLarge,
                    fmt::format("cannot draw {} pairs from {} without replacement", batch, n));
    }

    // partial Fisher-Yates: the first `batch` slots hold the sample
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < batch; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n - 1);
        std::swap(order[k], order[pick(rng)]);
    }

    std::vector<double> weights = ranker.to_dense();
    std::vector<double> mean_gradient(weights.size(), 0.0);
    for (std::size_t k = 0; k < batch; ++k) {
        const auto& pair = training.pairs()[order[k]];
        const auto g = pair_gradient(ranker, training.first_features(pair),
                                     training.second_features(pair), pair.label);
        for (std::size_t c = 0; c < g.size(); ++c) mean_gradient[c] += g[c];
    }
    const double step = config.learning_rate / static_cast<double>(batch);
    for (std::size_t c = 0; c < weights.size(); ++c) weights[c] -= step * mean_gradient[c];
    return LinearRanker::dense(weights);
}

SgdResult train(const LinearRanker& initial, const PairDataset& training, const PairDataset& test,
                const SgdConfig& config) {
    SgdResult result{{}, initial};
    auto record = [&](std::size_t iteration, const LinearRanker& ranker) {
        const auto on_train = evaluate_pairs(ranker, training);
        const auto on_test = evaluate_pairs(ranker, test);
        result.trajectory.records.push_back(
            {iteration, on_train.accuracy, on_test.accuracy, on_train.mean_loss});
    };
    record(0, result.final_ranker);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, {epoch}));
        result.final_ranker = train_epoch(result.final_ranker, training, config, rng);
        record(epoch, result.final_ranker);
    }
    return result;
}

}  // namespace rankneat
