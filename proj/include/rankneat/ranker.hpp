#pragma once

#include "rankneat/dataset.hpp"

#include <cstddef>
#include <json.hpp>
#include <span>
#include <utility>
#include <vector>

namespace rankneat {

inline constexpr double kProbabilityEpsilon = 1e-7;

/// Linear scoring function without a bias term. Weights are sparse: an
/// absent input index scores exactly like a zero weight.
class LinearRanker {
public:
    struct Entry {
        std::size_t index = 0;
        double weight = 0.0;

        bool operator==(const Entry&) const = default;
    };

    explicit LinearRanker(std::size_t dimension = 0) : dimension_(dimension) {}
    LinearRanker(std::size_t dimension, std::vector<Entry> entries);

    static LinearRanker dense(std::span<const double> weights);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    bool contains(std::size_t index) const;
    double weight(std::size_t index) const;
    void set(std::size_t index, double weight);
    void erase(std::size_t index);

    LinearRanker scaled(double factor) const;
    std::vector<double> to_dense() const;

    bool operator==(const LinearRanker&) const = default;

private:
    std::size_t dimension_ = 0;
    std::vector<Entry> entries_;  // sorted by index, unique
};

struct PairScore {
    double z = 0.0;
    double probability = 0.5;
};

double sigmoid(double z) noexcept;

double score(const LinearRanker& ranker, std::span<const double> x);

PairScore pair_logit(const LinearRanker& ranker, std::span<const double> first,
                     std::span<const double> second);

/// Binary cross-entropy with the probability clamped to [eps, 1 - eps].
double bce(double probability, int label) noexcept;

struct PairEvaluation {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

/// Accuracy and mean BCE over every pair in one pass. A tie (z == 0) earns
/// half credit.
PairEvaluation evaluate_pairs(const LinearRanker& ranker, const PairDataset& dataset);

double pair_accuracy(const LinearRanker& ranker, const PairDataset& dataset);

/// Score of every window, indexed [session][window].
std::vector<std::vector<double>> window_scores(const LinearRanker& ranker,
                                               const PairDataset& dataset);

nlohmann::json to_json(const LinearRanker& ranker);
LinearRanker ranker_from_json(const nlohmann::json& json);

}  // namespace rankneat
