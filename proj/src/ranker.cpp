#include "rankneat/ranker.hpp"

#include "rankneat/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <string>

namespace rankneat {

namespace {

auto find_entry(std::vector<LinearRanker::Entry>& entries, std::size_t index) {
    return std::lower_bound(entries.begin(), entries.end(), index,
                            [](const auto& e, std::size_t i) { return e.index < i; });
}

void check_dimension(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("feature vector has {} components, ranker expects {}", got,
                                expected));
    }
}

}  // namespace

LinearRanker::LinearRanker(std::size_t dimension, std::vector<Entry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& e = entries_[k];
        if (e.index >= dimension_) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("weight index {} outside dimension {}", e.index, dimension_));
        }
        if (!std::isfinite(e.weight)) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("weight {} is not finite", e.index));
        }
        if (k > 0 && entries_[k - 1].index == e.index) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("weight index {} repeated", e.index));
        }
    }
}

LinearRanker LinearRanker::dense(std::span<const double> weights) {
    std::vector<Entry> entries;
    entries.reserve(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) entries.push_back({k, weights[k]});
    return LinearRanker(weights.size(), std::move(entries));
}

bool LinearRanker::contains(std::size_t index) const {
    return std::binary_search(
        entries_.begin(), entries_.end(), Entry{index, 0.0},
        [](const auto& a, const auto& b) { return a.index < b.index; });
}

double LinearRanker::weight(std::size_t index) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                                     [](const auto& e, std::size_t i) { return e.index < i; });
    return it != entries_.end() && it->index == index ? it->weight : 0.0;
}

void LinearRanker::set(std::size_t index, double weight) {
    if (index >= dimension_) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("weight index {} outside dimension {}", index, dimension_));
    }
    if (!std::isfinite(weight)) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("weight {} is not finite", index));
    }
    auto it = find_entry(entries_, index);
    if (it != entries_.end() && it->index == index) {
        it->weight = weight;
    } else {
        entries_.insert(it, Entry{index, weight});
    }
}

void LinearRanker::erase(std::size_t index) {
    auto it = find_entry(entries_, index);
    if (it != entries_.end() && it->index == index) entries_.erase(it);
}

LinearRanker LinearRanker::scaled(double factor) const {
    LinearRanker out = *this;
    for (auto& e : out.entries_) e.weight *= factor;
    return out;
}

std::vector<double> LinearRanker::to_dense() const {
    std::vector<double> out(dimension_, 0.0);
    for (const auto& e : entries_) out[e.index] = e.weight;
    return out;
}

// ---------------------------------------------------------------------------

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double score(const LinearRanker& ranker, std::span<const double> x) {
    check_dimension(ranker.dimension(), x.size());
    double total = 0.0;
    for (const auto& e : ranker.entries()) total += e.weight * x[e.index];
    return total;
}

PairScore pair_logit(const LinearRanker& ranker, std::span<const double> first,
                     std::span<const double> second) {
    const double z = score(ranker, first) - score(ranker, second);
    return {z, sigmoid(z)};
}

double bce(double probability, int label) noexcept {
    const double p = std::clamp(probability, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

std::vector<std::vector<double>> window_scores(const LinearRanker& ranker,
                                               const PairDataset& dataset) {
    std::vector<std::vector<double>> scores;
    scores.reserve(dataset.sessions().size());
    for (const auto& session : dataset.sessions()) {
        auto& row = scores.emplace_back();
        row.reserve(session.windows.size());
        for (const auto& w : session.windows) row.push_back(score(ranker, w.features));
    }
    return scores;
}

PairEvaluation evaluate_pairs(const LinearRanker& ranker, const PairDataset& dataset) {
    if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "no pairs to evaluate");
    const auto scores = window_scores(ranker, dataset);
    double credit = 0.0;
    double loss = 0.0;
    for (const auto& pair : dataset.pairs()) {
        const auto& row = scores[pair.session];
        const double z = row[pair.first] - row[pair.second];
        if (z == 0.0) {
            credit += 0.5;
        } else if ((z > 0.0) == (pair.label == 1)) {
            credit += 1.0;
        }
        loss += bce(sigmoid(z), pair.label);
    }
    const auto n = static_cast<double>(dataset.size());
    return {credit / n, loss / n};
}

double pair_accuracy(const LinearRanker& ranker, const PairDataset& dataset) {
    return evaluate_pairs(ranker, dataset).accuracy;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const LinearRanker& ranker) {
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& e : ranker.entries()) weights[std::to_string(e.index)] = e.weight;
    return {{"dimension", ranker.dimension()}, {"weights", weights}};
}

LinearRanker ranker_from_json(const nlohmann::json& json) {
    try {
        const auto d = json.at("dimension").get<std::size_t>();
        std::vector<LinearRanker::Entry> entries;
        for (const auto& [key, value] : json.at("weights").items()) {
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
            if (ec != std::errc() || ptr != key.data() + key.size()) {
                throw Error(ErrorKind::ParseError, "weight key '" + key + "' is not an index");
            }
            entries.push_back({index, value.get<double>()});
        }
        return LinearRanker(d, std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

}  // namespace rankneat
